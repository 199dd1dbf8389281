#include "agg/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace agg {

namespace {

std::string format_counts(std::span<const int> counts) {
  std::ostringstream out;
  out << '(';
  for (std::size_t p = 0; p < counts.size(); ++p) {
    if (p) out << ',';
    out << counts[p];
  }
  out << ')';
  return out.str();
}

bool in_range(int index, int size) { return index >= 0 && index < size; }

bool has_duplicates(std::vector<int> values) {
  std::sort(values.begin(), values.end());
  return std::adjacent_find(values.begin(), values.end()) != values.end();
}

// Checks that only concern indices and sizes; the caches and the utility
// checks rely on these passing.
void check_structure(int num_agents, const std::vector<std::string>& actions,
                     const std::vector<std::vector<int>>& action_sets,
                     const std::vector<std::vector<int>>& neighbors, ValidationReport& report) {
  const int num_actions = static_cast<int>(actions.size());
  auto add = [&](std::string kind, std::string message, int action = -1) {
    report.violations.push_back({std::move(kind), std::move(message), action, {}});
  };
  if (num_agents < 1) add("bad_agents", "num_agents must be positive");
  if (num_actions == 0) add("no_actions", "the game has no actions");
  if (static_cast<int>(action_sets.size()) != num_agents) {
    add("bad_action_sets", "expected " + std::to_string(num_agents) + " action sets, found " +
                               std::to_string(action_sets.size()));
  }
  if (static_cast<int>(neighbors.size()) != num_actions) {
    add("bad_neighbors", "expected " + std::to_string(num_actions) + " neighbor lists, found " +
                             std::to_string(neighbors.size()));
  }
  std::set<std::string> names;
  for (int s = 0; s < num_actions; ++s) {
    if (!names.insert(actions[s]).second) {
      add("duplicate_action", "action identifier '" + actions[s] + "' is used twice", s);
    }
  }
  std::vector<bool> used(num_actions, false);
  for (std::size_t i = 0; i < action_sets.size(); ++i) {
    const auto& set = action_sets[i];
    if (set.empty()) add("empty_action_set", "agent " + std::to_string(i) + " has no actions");
    for (int s : set) {
      if (!in_range(s, num_actions)) {
        add("out_of_range", "action set of agent " + std::to_string(i) + " references index " +
                                std::to_string(s) + " but there are " +
                                std::to_string(num_actions) + " actions");
      } else {
        used[s] = true;
      }
    }
    if (has_duplicates(set)) {
      add("duplicate_entry", "action set of agent " + std::to_string(i) + " repeats an action");
    }
  }
  for (std::size_t s = 0; s < neighbors.size(); ++s) {
    for (int a : neighbors[s]) {
      if (!in_range(a, num_actions)) {
        add("out_of_range", "neighbors of action " + std::to_string(s) + " reference index " +
                                std::to_string(a) + " but there are " +
                                std::to_string(num_actions) + " actions",
            static_cast<int>(s));
      }
    }
    if (has_duplicates(neighbors[s])) {
      add("duplicate_entry", "neighbors of action " + std::to_string(s) + " repeat an action",
          static_cast<int>(s));
    }
  }
  for (int s = 0; s < num_actions; ++s) {
    if (!used[s]) {
      add("unused_action", "action '" + actions[s] + "' is in no agent's action set", s);
    }
  }
}

void check_utility(const ActionGraphGame& game, ValidationReport& report) {
  const int n = game.num_agents();
  const int num_actions = game.num_actions();
  auto add = [&](std::string kind, std::string message, int action,
                 std::vector<int> counts = {}) {
    report.violations.push_back({std::move(kind), std::move(message), action, std::move(counts)});
  };
  if (const auto* table = std::get_if<TableUtility>(&game.utility())) {
    if (static_cast<int>(table->entries.size()) != num_actions) {
      add("bad_utility", "table utility must list every action", -1);
      return;
    }
    for (int s = 0; s < num_actions; ++s) {
      const std::size_t q = game.neighbors(s).size();
      bool shape_ok = true;
      for (const auto& [counts, value] : table->entries[s]) {
        const bool bad = counts.size() != q ||
                         std::any_of(counts.begin(), counts.end(),
                                     [&](int c) { return c < 0 || c > n; });
        if (bad) {
          shape_ok = false;
          add("bad_entry",
              "table entry " + format_counts(counts) + " of action '" + game.actions()[s] +
                  "' does not match its " + std::to_string(q) + " neighbors",
              s, counts);
        }
      }
      if (!shape_ok) continue;
      for (const auto& counts :
           reachable_neighbor_counts(n, game.action_sets(), game.neighbors(), s)) {
        if (!table->entries[s].contains(counts)) {
          add("missing_entry",
              "missing utility entry for action '" + game.actions()[s] + "' with counts " +
                  format_counts(counts),
              s, counts);
        }
      }
    }
  } else {
    const auto& linear = std::get<LinearUtility>(game.utility());
    if (static_cast<int>(linear.coefficients.size()) != num_actions) {
      add("bad_utility", "linear utility must list every action", -1);
      return;
    }
    for (int s = 0; s < num_actions; ++s) {
      const auto& per_neighbor = linear.coefficients[s];
      if (per_neighbor.size() != game.neighbors(s).size()) {
        add("bad_coefficients",
            "linear utility of action '" + game.actions()[s] +
                "' must have one coefficient array per neighbor",
            s);
        continue;
      }
      for (std::size_t p = 0; p < per_neighbor.size(); ++p) {
        if (static_cast<int>(per_neighbor[p].size()) != n + 1) {
          add("bad_coefficients",
              "coefficient array for neighbor " + std::to_string(game.neighbors(s)[p]) +
                  " of action '" + game.actions()[s] + "' needs " + std::to_string(n + 1) +
                  " entries",
              s);
        }
      }
    }
  }
}

}  // namespace

int Distribution::total() const { return std::accumulate(counts.begin(), counts.end(), 0); }

ActionGraphGame::ActionGraphGame(int num_agents, std::vector<std::string> actions,
                                 std::vector<std::vector<int>> action_sets,
                                 std::vector<std::vector<int>> neighbors, UtilityFunction utility)
    : num_agents_(num_agents),
      actions_(std::move(actions)),
      action_sets_(std::move(action_sets)),
      neighbors_(std::move(neighbors)),
      utility_(std::move(utility)) {
  check_structure(num_agents_, actions_, action_sets_, neighbors_, report_);
  if (!report_.ok()) return;
  build_caches();
  if (!report_.ok()) return;
  check_utility(*this, report_);
}

void ActionGraphGame::build_caches() {
  const int num_actions = static_cast<int>(actions_.size());
  offsets_.clear();
  dimension_ = 0;
  for (const auto& set : action_sets_) {
    offsets_.push_back(dimension_);
    dimension_ += static_cast<int>(set.size());
  }
  views_.clear();
  max_in_degree_ = 0;
  for (int s = 0; s < num_actions; ++s) {
    views_.push_back(make_view(s, neighbors_[s], num_actions));
    max_in_degree_ = std::max(max_in_degree_, static_cast<int>(neighbors_[s].size()));
  }

  const auto radix = static_cast<std::uint64_t>(num_agents_) + 1;
  radix_.assign(num_actions, radix);
  table_index_.clear();
  if (const auto* table = std::get_if<TableUtility>(&utility_)) {
    if (static_cast<int>(table->entries.size()) != num_actions) return;
    table_index_.resize(num_actions);
    for (int s = 0; s < num_actions; ++s) {
      // Keys are mixed-radix encodings of the neighbor counts.
      long double span = 1;
      for (std::size_t p = 0; p < neighbors_[s].size(); ++p) span *= static_cast<long double>(radix);
      if (span > static_cast<long double>(std::numeric_limits<std::uint64_t>::max() / 2)) {
        report_.violations.push_back(
            {"neighborhood_too_large",
             "action '" + actions_[s] + "' has too many neighbors for a table utility", s, {}});
        continue;
      }
      for (const auto& [counts, value] : table->entries[s]) {
        if (counts.size() != neighbors_[s].size()) continue;
        std::uint64_t key = 0;
        std::uint64_t scale = 1;
        bool ok = true;
        for (int c : counts) {
          if (c < 0 || c > num_agents_) ok = false;
          key += static_cast<std::uint64_t>(c) * scale;
          scale *= radix;
        }
        if (ok) table_index_[s].emplace(key, value);
      }
    }
  }
}

void ActionGraphGame::require_valid() const {
  if (report_.ok()) return;
  throw GameError("invalid game: " + report_.violations.front().message);
}

bool ActionGraphGame::has_shared_action_sets() const {
  return std::all_of(action_sets_.begin(), action_sets_.end(),
                     [&](const auto& set) { return set == action_sets_.front(); });
}

std::vector<std::pair<int, int>> ActionGraphGame::strategy_order() const {
  std::vector<std::pair<int, int>> order;
  order.reserve(dimension_);
  for (int i = 0; i < num_agents_; ++i) {
    for (int s : action_sets_[i]) order.emplace_back(i, s);
  }
  return order;
}

int ActionGraphGame::local_index(int agent, int action) const {
  const auto& set = action_sets_.at(agent);
  auto it = std::find(set.begin(), set.end(), action);
  return it == set.end() ? -1 : static_cast<int>(it - set.begin());
}

double ActionGraphGame::utility(int action, std::span<const int> neighbor_counts) const {
  if (const auto* linear = std::get_if<LinearUtility>(&utility_)) {
    const auto& f = linear->coefficients[action];
    double total = 0.0;
    for (std::size_t p = 0; p < f.size(); ++p) total += f[p][neighbor_counts[p]];
    return total;
  }
  const std::uint64_t radix = radix_[action];
  std::uint64_t key = 0;
  std::uint64_t scale = 1;
  for (int c : neighbor_counts) {
    key += static_cast<std::uint64_t>(c) * scale;
    scale *= radix;
  }
  const auto& index = table_index_[action];
  auto it = index.find(key);
  if (it == index.end()) {
    throw GameError("missing utility entry for action '" + actions_[action] + "' with counts " +
                    format_counts(neighbor_counts));
  }
  return it->second;
}

double ActionGraphGame::linear_term(int action, int position, int count) const {
  const auto* linear = std::get_if<LinearUtility>(&utility_);
  if (!linear) throw GameError("linear_term called on a table game");
  return linear->coefficients[action][position][count];
}

std::pair<double, double> ActionGraphGame::utility_bounds() const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  if (const auto* table = std::get_if<TableUtility>(&utility_)) {
    for (const auto& per_action : table->entries) {
      for (const auto& [counts, value] : per_action) {
        lo = std::min(lo, value);
        hi = std::max(hi, value);
      }
    }
  } else {
    for (const auto& per_action : std::get<LinearUtility>(utility_).coefficients) {
      double action_lo = 0.0;
      double action_hi = 0.0;
      for (const auto& f : per_action) {
        action_lo += *std::min_element(f.begin(), f.end());
        action_hi += *std::max_element(f.begin(), f.end());
      }
      lo = std::min(lo, action_lo);
      hi = std::max(hi, action_hi);
    }
  }
  if (lo > hi) return {0.0, 0.0};
  return {lo, hi};
}

std::optional<int> ActionGraphGame::find_action(std::string_view name) const {
  for (std::size_t s = 0; s < actions_.size(); ++s) {
    if (actions_[s] == name) return static_cast<int>(s);
  }
  return std::nullopt;
}

ValidationReport validate_game(const ActionGraphGame& game) { return game.validation(); }

std::vector<std::vector<int>> reachable_neighbor_counts(
    int num_agents, const std::vector<std::vector<int>>& action_sets,
    const std::vector<std::vector<int>>& neighbors, int action) {
  const auto& kept = neighbors.at(action);
  const int q = static_cast<int>(kept.size());
  auto position = [&](int a) {
    auto it = std::find(kept.begin(), kept.end(), a);
    return it == kept.end() ? -1 : static_cast<int>(it - kept.begin());
  };
  // Options of each agent: neighbor positions, plus -1 when it can play
  // something outside the neighborhood.
  std::vector<std::vector<int>> options(num_agents);
  for (int j = 0; j < num_agents; ++j) {
    std::set<int> opts;
    for (int a : action_sets.at(j)) opts.insert(position(a));
    options[j].assign(opts.begin(), opts.end());
  }

  std::set<std::vector<int>> result;
  std::set<std::vector<std::vector<int>>> seen_anchors;
  const int own = position(action);
  for (int i = 0; i < num_agents; ++i) {
    const auto& set = action_sets.at(i);
    if (std::find(set.begin(), set.end(), action) == set.end()) continue;
    std::vector<std::vector<int>> signature;
    for (int j = 0; j < num_agents; ++j) {
      if (j != i) signature.push_back(options[j]);
    }
    std::sort(signature.begin(), signature.end());
    if (!seen_anchors.insert(signature).second) continue;

    std::set<std::vector<int>> frontier;
    std::vector<int> start(q, 0);
    if (own >= 0) start[own] = 1;
    frontier.insert(start);
    for (const auto& opts : signature) {
      std::set<std::vector<int>> next;
      for (const auto& counts : frontier) {
        for (int p : opts) {
          auto grown = counts;
          if (p >= 0) ++grown[p];
          next.insert(std::move(grown));
        }
      }
      frontier = std::move(next);
    }
    result.insert(frontier.begin(), frontier.end());
  }
  return {result.begin(), result.end()};
}

Distribution distribution_of(const ActionGraphGame& game, std::span<const int> pure_profile) {
  if (static_cast<int>(pure_profile.size()) != game.num_agents()) {
    throw GameError("pure profile must name one action per agent");
  }
  Distribution d{std::vector<int>(game.num_actions(), 0)};
  for (int i = 0; i < game.num_agents(); ++i) {
    const int s = pure_profile[i];
    if (game.local_index(i, s) < 0) {
      throw GameError("agent " + std::to_string(i) + " cannot play action " + std::to_string(s));
    }
    ++d.counts[s];
  }
  return d;
}

ProjectedView make_view(int anchor, std::span<const int> neighbors, int num_actions) {
  ProjectedView view;
  view.anchor = anchor;
  view.kept.assign(neighbors.begin(), neighbors.end());
  view.node_of_action.assign(num_actions, view.sink());
  for (std::size_t p = 0; p < view.kept.size(); ++p) {
    view.node_of_action[view.kept[p]] = static_cast<int>(p);
  }
  return view;
}

Distribution project_distribution(const ProjectedView& view, const Distribution& full) {
  Distribution projected{std::vector<int>(view.node_count(), 0)};
  for (std::size_t a = 0; a < full.counts.size(); ++a) {
    projected.counts[view.node_of_action.at(a)] += full.counts[a];
  }
  return projected;
}

std::vector<double> project_mixed_strategy(const ProjectedView& view,
                                           std::span<const int> action_set,
                                           std::span<const double> probabilities) {
  std::vector<double> projected(view.node_count(), 0.0);
  for (std::size_t k = 0; k < action_set.size(); ++k) {
    projected[view.node_of_action.at(action_set[k])] += probabilities[k];
  }
  return projected;
}

double utility_eval(const ActionGraphGame& game, int action, const Distribution& projected,
                    std::optional<ActionPair> adjust) {
  const ProjectedView& view = game.view(action);
  if (static_cast<int>(projected.counts.size()) != view.node_count()) {
    throw GameError("distribution is not carried on the view of action " +
                    std::to_string(action));
  }
  std::vector<int> counts(projected.counts.begin(), projected.counts.end() - 1);
  if (adjust) {
    for (int a : {adjust->first, adjust->second}) {
      const int node = view.node_of_action.at(a);
      if (node != view.sink()) ++counts[node];
    }
  }
  return game.utility(action, counts);
}

MixedProfile uniform_profile(const ActionGraphGame& game) {
  MixedProfile profile;
  for (const auto& set : game.action_sets()) {
    profile.strategies.emplace_back(set.size(), 1.0 / static_cast<double>(set.size()));
  }
  return profile;
}

void check_profile(const ActionGraphGame& game, const MixedProfile& profile, double tolerance) {
  if (static_cast<int>(profile.strategies.size()) != game.num_agents()) {
    throw GameError("profile has " + std::to_string(profile.strategies.size()) +
                    " strategies for " + std::to_string(game.num_agents()) + " agents");
  }
  for (int i = 0; i < game.num_agents(); ++i) {
    const auto& sigma = profile.strategies[i];
    if (sigma.size() != game.action_set(i).size()) {
      throw GameError("strategy of agent " + std::to_string(i) + " has " +
                      std::to_string(sigma.size()) + " entries, expected " +
                      std::to_string(game.action_set(i).size()));
    }
    double sum = 0.0;
    for (double p : sigma) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw GameError("strategy of agent " + std::to_string(i) + " has a negative entry");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > tolerance) {
      throw GameError("strategy of agent " + std::to_string(i) + " does not sum to one");
    }
  }
}

std::vector<double> flatten(const MixedProfile& profile) {
  std::vector<double> flat;
  for (const auto& sigma : profile.strategies) flat.insert(flat.end(), sigma.begin(), sigma.end());
  return flat;
}

MixedProfile unflatten(const ActionGraphGame& game, std::span<const double> flat) {
  if (static_cast<int>(flat.size()) != game.dimension()) {
    throw GameError("flat strategy vector has the wrong dimension");
  }
  MixedProfile profile;
  for (int i = 0; i < game.num_agents(); ++i) {
    auto begin = flat.begin() + game.offset(i);
    profile.strategies.emplace_back(begin, begin + game.action_set(i).size());
  }
  return profile;
}

}  // namespace agg
