#include "agg/payoff.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>

#include "detail/enumeration.hpp"
#include "detail/parallel.hpp"

namespace agg {

std::string_view to_string(JacobianMethod method) {
  switch (method) {
    case JacobianMethod::naive: return "naive";
    case JacobianMethod::projected: return "projected";
    case JacobianMethod::partitioned: return "partitioned";
    case JacobianMethod::symmetric: return "symmetric";
  }
  return "unknown";
}

JacobianMethod parse_method(std::string_view name) {
  if (name == "naive") return JacobianMethod::naive;
  if (name == "projected") return JacobianMethod::projected;
  if (name == "partitioned") return JacobianMethod::partitioned;
  if (name == "symmetric") return JacobianMethod::symmetric;
  throw std::invalid_argument("unknown Jacobian method '" + std::string(name) + "'");
}

namespace {

using detail::Odometer;
using detail::Opponent;

PayoffJacobian empty_jacobian(const ActionGraphGame& game, JacobianMethod method) {
  const int m = game.dimension();
  PayoffJacobian jacobian;
  jacobian.values = Eigen::MatrixXd::Zero(m, m);
  jacobian.order = game.strategy_order();
  jacobian.method = method;
  jacobian.entry_utility_evals.assign(static_cast<std::size_t>(m) * m, 0);
  return jacobian;
}

// Nodes of view(s_i) an opponent's column can land on, with the first
// column (local index) mapping to each node.
struct ColumnGroups {
  std::vector<int> nodes;
  std::vector<int> representative;
};

ColumnGroups column_groups(const ProjectedView& view, std::span<const int> action_set) {
  ColumnGroups groups;
  for (std::size_t c = 0; c < action_set.size(); ++c) {
    const int node = view.node_of_action[action_set[c]];
    if (std::find(groups.nodes.begin(), groups.nodes.end(), node) == groups.nodes.end()) {
      groups.nodes.push_back(node);
      groups.representative.push_back(static_cast<int>(c));
    }
  }
  return groups;
}

// Kept-node counts of the pinned agent choosing `action`.
std::vector<int> anchor_counts(const ProjectedView& view, int action) {
  std::vector<int> counts(view.kept.size(), 0);
  const int node = view.node_of_action[action];
  if (node != view.sink()) ++counts[node];
  return counts;
}

// One row block (agent, action) of the projected or partitioned Jacobian.
EvalCounters projected_row(const ActionGraphGame& game, const MixedProfile& profile, int agent,
                           int action, bool partitioned, const EngineOptions& options,
                           PayoffJacobian& jacobian) {
  EvalCounters counters;
  const ProjectedView& view = game.view(action);
  const int sink = view.sink();
  const int row = game.offset(agent) + game.local_index(agent, action);
  const int m = game.dimension();
  const std::vector<int> base = anchor_counts(view, action);

  for (int other = 0; other < game.num_agents(); ++other) {
    if (other == agent) continue;
    const auto opponents = detail::projected_opponents(game, view, profile, agent, other);
    detail::check_cap(opponents, options.profile_cap);
    const ColumnGroups groups = column_groups(view, game.action_set(other));
    std::vector<double> sums(groups.nodes.size(), 0.0);
    std::vector<std::uint64_t> evals(groups.nodes.size(), 0);

    auto accumulate = [&](std::vector<int>& counts, double probability) {
      for (std::size_t g = 0; g < groups.nodes.size(); ++g) {
        const int node = groups.nodes[g];
        if (node != sink) ++counts[node];
        sums[g] += game.utility(action, counts) * probability;
        if (node != sink) --counts[node];
        ++evals[g];
      }
    };

    Odometer odometer(detail::radices(opponents));
    std::vector<int> counts = base;
    std::vector<int> picks(opponents.size());
    for (std::size_t j = 0; j < opponents.size(); ++j) {
      picks[j] = opponents[j].nodes[0];
      if (picks[j] != sink) ++counts[picks[j]];
    }

    if (!partitioned) {
      do {
        const double probability = detail::profile_probability(opponents, odometer.digits());
        ++counters.probability_evals;
        accumulate(counts, probability);
      } while (detail::step(odometer, opponents, picks, counts, sink));
    } else {
      // Class probabilities, keyed by the kept-node counts of the others.
      std::map<std::vector<int>, double> classes;
      std::vector<int> previous = picks;
      double probability = detail::profile_probability(opponents, odometer.digits());
      ++counters.probability_evals;
      bool more = true;
      while (more) {
        std::vector<int> key(counts.size());
        for (std::size_t p = 0; p < counts.size(); ++p) key[p] = counts[p] - base[p];
        classes[std::move(key)] += probability;

        previous = picks;
        more = detail::step(odometer, opponents, picks, counts, sink);
        if (!more) break;
        ++counters.probability_evals;
        // Successive profiles that differ by a transposition of two agents'
        // choices reuse the previous probability.
        std::optional<double> swapped;
        int first = -1;
        int second = -1;
        int changed = 0;
        for (std::size_t j = 0; j < picks.size() && changed <= 2; ++j) {
          if (picks[j] != previous[j]) {
            (changed == 0 ? first : second) = static_cast<int>(j);
            ++changed;
          }
        }
        if (changed == 2 && picks[first] == previous[second] && picks[second] == previous[first]) {
          swapped = swap_probability(probability, opponents[first].projected,
                                     opponents[second].projected, previous[first],
                                     previous[second]);
        }
        if (swapped) {
          probability = *swapped;
          ++counters.swap_updates;
        } else {
          probability = detail::profile_probability(opponents, odometer.digits());
        }
      }
      std::vector<int> full(base.size());
      for (const auto& [key, class_probability] : classes) {
        for (std::size_t p = 0; p < base.size(); ++p) full[p] = key[p] + base[p];
        accumulate(full, class_probability);
      }
    }

    for (std::size_t g = 0; g < groups.nodes.size(); ++g) {
      const int col = game.offset(other) + groups.representative[g];
      jacobian.values(row, col) = sums[g];
      jacobian.entry_utility_evals[static_cast<std::size_t>(row) * m + col] = evals[g];
      counters.utility_evals += evals[g];
    }
  }
  return counters;
}

EvalCounters naive_row(const ActionGraphGame& game, const MixedProfile& profile, int agent,
                       int action, const EngineOptions& options, PayoffJacobian& jacobian) {
  EvalCounters counters;
  const int row = game.offset(agent) + game.local_index(agent, action);
  const int m = game.dimension();
  const auto& kept = game.neighbors(action);
  std::vector<int> neighbor_counts(kept.size());

  for (int other = 0; other < game.num_agents(); ++other) {
    if (other == agent) continue;
    const auto opponents = detail::full_opponents(game, profile, agent, other);
    detail::check_cap(opponents, options.profile_cap);
    const auto& other_set = game.action_set(other);
    for (std::size_t c = 0; c < other_set.size(); ++c) {
      std::vector<int> counts(game.num_actions(), 0);
      ++counts[action];
      ++counts[other_set[c]];
      for (const auto& o : opponents) ++counts[o.nodes[0]];
      Odometer odometer(detail::radices(opponents));
      double sum = 0.0;
      std::uint64_t evals = 0;
      do {
        for (std::size_t p = 0; p < kept.size(); ++p) neighbor_counts[p] = counts[kept[p]];
        const double probability = detail::profile_probability(opponents, odometer.digits());
        ++counters.probability_evals;
        sum += game.utility(action, neighbor_counts) * probability;
        ++evals;
      } while (detail::step_full(odometer, opponents, counts));
      const int col = game.offset(other) + static_cast<int>(c);
      jacobian.values(row, col) = sum;
      jacobian.entry_utility_evals[static_cast<std::size_t>(row) * m + col] = evals;
      counters.utility_evals += evals;
    }
  }
  return counters;
}

template <typename RowFn>
PayoffJacobian row_parallel(const ActionGraphGame& game, const MixedProfile& profile,
                            JacobianMethod method, const EngineOptions& options, RowFn&& row_fn) {
  game.require_valid();
  check_profile(game, profile, 1e-9);
  PayoffJacobian jacobian = empty_jacobian(game, method);
  const auto rows = game.strategy_order();
  std::vector<EvalCounters> per_row(rows.size());
  detail::parallel_for(rows.size(), options.threads, [&](std::size_t r) {
    per_row[r] = row_fn(rows[r].first, rows[r].second, jacobian);
  });
  for (const auto& c : per_row) jacobian.counters += c;
  return jacobian;
}

}  // namespace

double expected_payoff(const ActionGraphGame& game, int agent, int action,
                       const MixedProfile& profile, const EngineOptions& options,
                       EvalCounters* counters) {
  game.require_valid();
  if (game.local_index(agent, action) < 0) {
    throw GameError("agent " + std::to_string(agent) + " cannot play action " +
                    std::to_string(action));
  }
  const ProjectedView& view = game.view(action);
  const int sink = view.sink();
  const auto opponents = detail::projected_opponents(game, view, profile, agent, agent);
  detail::check_cap(opponents, options.profile_cap);
  std::vector<int> counts = anchor_counts(view, action);
  std::vector<int> picks(opponents.size());
  for (std::size_t j = 0; j < opponents.size(); ++j) {
    picks[j] = opponents[j].nodes[0];
    if (picks[j] != sink) ++counts[picks[j]];
  }
  Odometer odometer(detail::radices(opponents));
  double value = 0.0;
  EvalCounters local;
  do {
    value += game.utility(action, counts) *
             detail::profile_probability(opponents, odometer.digits());
    ++local.utility_evals;
    ++local.probability_evals;
  } while (detail::step(odometer, opponents, picks, counts, sink));
  if (counters) *counters += local;
  return value;
}

Eigen::VectorXd expected_payoffs(const ActionGraphGame& game, const MixedProfile& profile,
                                 const EngineOptions& options, EvalCounters* counters) {
  game.require_valid();
  check_profile(game, profile, 1e-9);
  const auto order = game.strategy_order();
  Eigen::VectorXd values(order.size());
  std::vector<EvalCounters> per_row(order.size());
  detail::parallel_for(order.size(), options.threads, [&](std::size_t r) {
    values[static_cast<Eigen::Index>(r)] =
        expected_payoff(game, order[r].first, order[r].second, profile, options, &per_row[r]);
  });
  if (counters) {
    for (const auto& c : per_row) *counters += c;
  }
  return values;
}

PayoffJacobian jacobian_naive(const ActionGraphGame& game, const MixedProfile& profile,
                              const EngineOptions& options) {
  return row_parallel(game, profile, JacobianMethod::naive, options,
                      [&](int agent, int action, PayoffJacobian& jacobian) {
                        return naive_row(game, profile, agent, action, options, jacobian);
                      });
}

PayoffJacobian jacobian_projected(const ActionGraphGame& game, const MixedProfile& profile,
                                  const EngineOptions& options) {
  auto jacobian = row_parallel(game, profile, JacobianMethod::projected, options,
                               [&](int agent, int action, PayoffJacobian& jacobian) {
                                 return projected_row(game, profile, agent, action, false,
                                                      options, jacobian);
                               });
  return share_entries(std::move(jacobian), game);
}

PayoffJacobian jacobian_partitioned(const ActionGraphGame& game, const MixedProfile& profile,
                                    const EngineOptions& options) {
  auto jacobian = row_parallel(game, profile, JacobianMethod::partitioned, options,
                               [&](int agent, int action, PayoffJacobian& jacobian) {
                                 return projected_row(game, profile, agent, action, true,
                                                      options, jacobian);
                               });
  return share_entries(std::move(jacobian), game);
}

PayoffJacobian compute_jacobian(const ActionGraphGame& game, const MixedProfile& profile,
                                JacobianMethod method, const EngineOptions& options) {
  switch (method) {
    case JacobianMethod::naive: return jacobian_naive(game, profile, options);
    case JacobianMethod::projected: return jacobian_projected(game, profile, options);
    case JacobianMethod::partitioned: return jacobian_partitioned(game, profile, options);
    case JacobianMethod::symmetric: break;
  }
  throw std::invalid_argument("the symmetric Jacobian is computed by jacobian_symmetric");
}

std::optional<double> swap_probability(double probability, std::span<const double> first,
                                       std::span<const double> second, int first_node,
                                       int second_node) {
  const double denominator = first[first_node] * second[second_node];
  if (denominator == 0.0 || second[first_node] == 0.0 || first[second_node] == 0.0) {
    return std::nullopt;
  }
  return probability * (second[first_node] * first[second_node]) / denominator;
}

PayoffJacobian share_entries(PayoffJacobian jacobian, const ActionGraphGame& game) {
  for (int i = 0; i < game.num_agents(); ++i) {
    for (int s : game.action_set(i)) {
      const int row = game.offset(i) + game.local_index(i, s);
      const ProjectedView& view = game.view(s);
      for (int other = 0; other < game.num_agents(); ++other) {
        if (other == i) continue;
        const auto& other_set = game.action_set(other);
        int representative = -1;
        for (std::size_t c = 0; c < other_set.size(); ++c) {
          if (view.node_of_action[other_set[c]] != view.sink()) continue;
          const int col = game.offset(other) + static_cast<int>(c);
          if (representative < 0) {
            representative = col;
          } else {
            jacobian.values(row, col) = jacobian.values(row, representative);
          }
        }
      }
    }
  }
  return jacobian;
}

std::uint64_t count_projected_distributions(int n_bar, int k) {
  if (n_bar < 0 || k < 1) throw std::invalid_argument("need n_bar >= 0 and k >= 1");
  unsigned __int128 result = 1;
  for (int t = 1; t < k; ++t) {
    // C(n_bar + t, t) = C(n_bar + t - 1, t - 1) * (n_bar + t) / t, exact.
    result = result * static_cast<unsigned __int128>(n_bar + t) / static_cast<unsigned>(t);
    if (result > std::numeric_limits<std::uint64_t>::max()) {
      throw std::overflow_error("composition count does not fit in 64 bits");
    }
  }
  return static_cast<std::uint64_t>(result);
}

double linear_utility_shift(const ActionGraphGame& game, int action, double current,
                            const Distribution& projected, int from, int to) {
  if (!game.is_linear()) throw GameError("linear_utility_shift needs a linear utility");
  const ProjectedView& view = game.view(action);
  if (static_cast<int>(projected.counts.size()) != view.node_count()) {
    throw GameError("distribution is not carried on the view of action " +
                    std::to_string(action));
  }
  if (projected.counts.at(from) < 1) throw GameError("move from an empty node");
  if (from == to) return current;
  double shifted = current;
  if (from != view.sink()) {
    const int c = projected.counts[from];
    shifted += game.linear_term(action, from, c - 1) - game.linear_term(action, from, c);
  }
  if (to != view.sink()) {
    const int c = projected.counts.at(to);
    shifted += game.linear_term(action, to, c + 1) - game.linear_term(action, to, c);
  }
  return shifted;
}

RegretReport engine_regret(const ActionGraphGame& game, const MixedProfile& profile,
                           const EngineOptions& options) {
  const Eigen::VectorXd values = expected_payoffs(game, profile, options);
  RegretReport report;
  for (int i = 0; i < game.num_agents(); ++i) {
    AgentRegret agent;
    agent.best_response_value = -std::numeric_limits<double>::infinity();
    const auto& sigma = profile.strategies[i];
    for (std::size_t k = 0; k < sigma.size(); ++k) {
      const double v = values[game.offset(i) + static_cast<Eigen::Index>(k)];
      agent.best_response_value = std::max(agent.best_response_value, v);
      agent.current_value += sigma[k] * v;
    }
    agent.regret = std::max(0.0, agent.best_response_value - agent.current_value);
    report.max_regret = std::max(report.max_regret, agent.regret);
    report.agents.push_back(agent);
  }
  return report;
}

}  // namespace agg
