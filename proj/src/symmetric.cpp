#include "agg/symmetric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "agg/payoff.hpp"

namespace agg {

namespace mp = boost::multiprecision;

CompositionWalk::CompositionWalk(int total, int parts)
    : total_(total), counts_(parts, 0), forward_(parts, 1), prefix_(parts, 0) {
  if (total < 0 || parts < 1) throw std::invalid_argument("need total >= 0 and parts >= 1");
  counts_[0] = total;
}

std::uint64_t CompositionWalk::length() const {
  return count_projected_distributions(total_, parts());
}

std::optional<Move> CompositionWalk::next() {
  const int k = parts();
  if (k == 1) return std::nullopt;
  std::partial_sum(counts_.begin(), counts_.end(), prefix_.begin());
  forward_[k - 1] = 1;
  for (int j = k - 1; j >= 1; --j) {
    forward_[j - 1] = ((counts_[j] % 2 == 0) == static_cast<bool>(forward_[j])) ? 1 : 0;
  }
  // The first level (innermost first) that can still move in its direction;
  // all levels below it sit at the end of their sweep, with the prefix mass
  // concentrated in a single part.
  for (int j = 1; j < k; ++j) {
    if (forward_[j] && counts_[j] < prefix_[j]) {
      const int from = forward_[j - 1] ? j - 1 : 0;
      --counts_[from];
      ++counts_[j];
      return Move{from, j};
    }
    if (!forward_[j] && counts_[j] > 0) {
      const bool next_forward = (counts_[j] - 1) % 2 != 0;
      const int to = next_forward ? 0 : j - 1;
      --counts_[j];
      ++counts_[to];
      return Move{j, to};
    }
  }
  return std::nullopt;
}

mp::cpp_int class_size(std::span<const int> counts) {
  // Build the multinomial as a product of binomials to keep numbers small.
  mp::cpp_int result = 1;
  int placed = 0;
  for (int c : counts) {
    if (c < 0) throw std::invalid_argument("negative count");
    for (int t = 1; t <= c; ++t) {
      ++placed;
      result *= placed;
      result /= t;
    }
  }
  return result;
}

double symmetric_profile_prob(std::span<const double> strategy, std::span<const int> counts) {
  double p = 1.0;
  for (std::size_t a = 0; a < counts.size(); ++a) {
    if (counts[a] > 0) p *= std::pow(strategy[a], counts[a]);
  }
  return p;
}

double symmetric_distribution_prob(std::span<const double> strategy, std::span<const int> counts) {
  const double profile = symmetric_profile_prob(strategy, counts);
  if (profile == 0.0) return 0.0;
  return static_cast<double>(class_size(counts)) * profile;
}

std::optional<double> distribution_prob_step(double probability, std::span<const double> strategy,
                                             std::span<const int> counts, Move move) {
  if (move.from == move.to) return probability;
  if (counts[move.from] < 1) throw std::invalid_argument("move from an empty part");
  if (strategy[move.from] == 0.0) return std::nullopt;
  return probability * (strategy[move.to] * counts[move.from]) /
         (strategy[move.from] * (counts[move.to] + 1));
}

namespace {

constexpr double kUnderflow = 1e-300;
constexpr std::uint64_t kRefreshInterval = 10'000;

// Class probability evaluated through logarithms; used when stepped values drift
// towards underflow.
double log_space_distribution_prob(std::span<const double> strategy, std::span<const int> counts) {
  const int n = std::accumulate(counts.begin(), counts.end(), 0);
  double log_p = std::lgamma(n + 1.0);
  for (std::size_t a = 0; a < counts.size(); ++a) {
    if (counts[a] == 0) continue;
    if (strategy[a] == 0.0) return 0.0;
    log_p += counts[a] * std::log(strategy[a]) - std::lgamma(counts[a] + 1.0);
  }
  return std::exp(log_p);
}

double direct_distribution_prob(std::span<const double> strategy, std::span<const int> counts) {
  const double p = symmetric_distribution_prob(strategy, counts);
  if (p != 0.0 && p < kUnderflow) return log_space_distribution_prob(strategy, counts);
  return p;
}

const std::vector<int>& shared_actions(const ActionGraphGame& game,
                                       std::span<const double> strategy) {
  game.require_valid();
  if (!game.has_shared_action_sets()) {
    throw GameError("symmetric computations need identical action sets for all agents");
  }
  const auto& actions = game.action_set(0);
  if (strategy.size() != actions.size()) {
    throw GameError("shared strategy has " + std::to_string(strategy.size()) +
                    " entries, expected " + std::to_string(actions.size()));
  }
  double sum = 0.0;
  for (double p : strategy) {
    if (!(p >= 0.0)) throw GameError("shared strategy has a negative entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw GameError("shared strategy does not sum to one");
  return actions;
}

struct RowSums {
  std::vector<double> sums;
  std::uint64_t evals_per_column = 0;
  EvalCounters counters;
};

// Walks every distribution of `others` agents over the projected graph of
// `action` and accumulates u(action, D(action, column, D)) * Pr(D) for each
// column. A column of -1 adds no agent.
RowSums symmetric_row(const ActionGraphGame& game, int action,
                      std::span<const double> strategy, int others,
                      std::span<const int> columns) {
  const auto& shared = game.action_set(0);
  const ProjectedView& view = game.view(action);
  const int sink = view.sink();

  // Walk parts are the reachable view nodes: the kept neighbors and, when
  // some action lies outside the neighborhood, the sink.
  const auto projected = project_mixed_strategy(view, shared, strategy);
  std::vector<int> part_node(view.kept.size());
  std::iota(part_node.begin(), part_node.end(), 0);
  const bool sink_reachable =
      std::any_of(shared.begin(), shared.end(),
                  [&](int a) { return view.node_of_action[a] == sink; });
  if (sink_reachable) part_node.push_back(sink);
  const int parts = static_cast<int>(part_node.size());
  std::vector<double> part_prob(parts);
  for (int p = 0; p < parts; ++p) part_prob[p] = projected[part_node[p]];

  RowSums row;
  row.sums.assign(columns.size(), 0.0);
  if (parts == 0) return row;  // no neighbors and nothing outside: impossible for valid games

  // Kept-node counts including the two pinned agents, one vector per column.
  std::vector<int> base(view.kept.size(), 0);
  if (view.node_of_action[action] != sink) ++base[view.node_of_action[action]];
  std::vector<std::vector<int>> column_counts(columns.size(), base);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] >= 0 && view.node_of_action[columns[c]] != sink) {
      ++column_counts[c][view.node_of_action[columns[c]]];
    }
  }

  CompositionWalk walk(others, parts);
  auto add_walk = [&](std::vector<int>& counts, int sign) {
    for (int p = 0; p < parts; ++p) {
      if (part_node[p] != sink) counts[part_node[p]] += sign * walk.current()[p];
    }
  };
  for (auto& counts : column_counts) add_walk(counts, +1);

  const bool linear = game.is_linear();
  std::vector<double> utilities(columns.size());
  auto refresh_utilities = [&] {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      utilities[c] = game.utility(action, column_counts[c]);
    }
  };
  refresh_utilities();

  double probability = direct_distribution_prob(part_prob, walk.current());
  ++row.counters.probability_evals;
  std::uint64_t steps = 0;
  while (true) {
    for (std::size_t c = 0; c < columns.size(); ++c) row.sums[c] += utilities[c] * probability;
    ++row.evals_per_column;

    const std::vector<int> before = walk.current();
    const auto move = walk.next();
    if (!move) break;
    ++steps;
    ++row.counters.probability_evals;

    const auto stepped = distribution_prob_step(probability, part_prob, before, *move);
    if (!stepped || *stepped < kUnderflow || steps % kRefreshInterval == 0) {
      probability = direct_distribution_prob(part_prob, walk.current());
    } else {
      probability = *stepped;
    }

    const int from = part_node[move->from];
    const int to = part_node[move->to];
    for (std::size_t c = 0; c < columns.size(); ++c) {
      auto& counts = column_counts[c];
      if (linear && steps % kRefreshInterval != 0) {
        // Constant-time update of the linear utility for the moved agent.
        double u = utilities[c];
        if (from != sink) {
          u += game.linear_term(action, from, counts[from] - 1) -
               game.linear_term(action, from, counts[from]);
          --counts[from];
        }
        if (to != sink) {
          u += game.linear_term(action, to, counts[to] + 1) -
               game.linear_term(action, to, counts[to]);
          ++counts[to];
        }
        utilities[c] = u;
      } else {
        if (from != sink) --counts[from];
        if (to != sink) ++counts[to];
        utilities[c] = game.utility(action, counts);
      }
    }
  }
  row.counters.utility_evals = row.evals_per_column * columns.size();
  return row;
}

}  // namespace

SymmetricJacobian jacobian_symmetric(const ActionGraphGame& game,
                                     std::span<const double> strategy) {
  const auto& actions = shared_actions(game, strategy);
  const int size = static_cast<int>(actions.size());
  SymmetricJacobian jacobian;
  jacobian.values = Eigen::MatrixXd::Zero(size, size);
  jacobian.actions = actions;
  jacobian.strategy.assign(strategy.begin(), strategy.end());
  jacobian.row_entry_evals.assign(size, 0);
  if (game.num_agents() < 2) return jacobian;

  const int others = game.num_agents() - 2;
  for (int r = 0; r < size; ++r) {
    const RowSums row = symmetric_row(game, actions[r], strategy, others, actions);
    for (int c = 0; c < size; ++c) jacobian.values(r, c) = row.sums[c];
    jacobian.row_entry_evals[r] = row.evals_per_column;
    jacobian.counters += row.counters;
  }
  return jacobian;
}

Eigen::VectorXd expected_payoffs_symmetric(const ActionGraphGame& game,
                                           std::span<const double> strategy,
                                           EvalCounters* counters) {
  const auto& actions = shared_actions(game, strategy);
  Eigen::VectorXd values(actions.size());
  const int none[] = {-1};
  for (std::size_t r = 0; r < actions.size(); ++r) {
    const RowSums row =
        symmetric_row(game, actions[r], strategy, game.num_agents() - 1, none);
    values[static_cast<Eigen::Index>(r)] = row.sums[0];
    if (counters) *counters += row.counters;
  }
  return values;
}

RegretReport symmetric_regret(const ActionGraphGame& game, std::span<const double> strategy) {
  const Eigen::VectorXd values = expected_payoffs_symmetric(game, strategy);
  AgentRegret agent;
  agent.best_response_value = values.maxCoeff();
  for (std::size_t k = 0; k < strategy.size(); ++k) {
    agent.current_value += strategy[k] * values[static_cast<Eigen::Index>(k)];
  }
  agent.regret = std::max(0.0, agent.best_response_value - agent.current_value);
  RegretReport report;
  report.agents.assign(game.num_agents(), agent);
  report.max_regret = agent.regret;
  return report;
}

}  // namespace agg
