#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace agg {

// Raised when an operation is handed a game or profile it cannot work with.
class GameError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Payoff tables keyed by the count vector over neighbors[s], in that order.
struct TableUtility {
  std::vector<std::map<std::vector<int>, double>> entries;
};

// u(s, D) = sum over p of coefficients[s][p][D(neighbors[s][p])].
// Each coefficient array has num_agents + 1 entries (counts 0..n).
struct LinearUtility {
  std::vector<std::vector<std::vector<double>>> coefficients;
};

using UtilityFunction = std::variant<TableUtility, LinearUtility>;

struct Violation {
  std::string kind;  // "out_of_range", "unused_action", "missing_entry", ...
  std::string message;
  int action = -1;
  std::vector<int> counts;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

// Agent counts per node of a carrier graph (the full action graph or a
// projected view, whose last node is the sink).
struct Distribution {
  std::vector<int> counts;
  int total() const;
};

// The action graph seen from an agent who chose `anchor`: the neighbors of
// the anchor are kept in order and every other action collapses onto the sink.
struct ProjectedView {
  int anchor = -1;
  std::vector<int> kept;
  std::vector<int> node_of_action;  // kept position, or sink()

  int sink() const { return static_cast<int>(kept.size()); }
  int node_count() const { return static_cast<int>(kept.size()) + 1; }
};

// Per-agent probability vectors aligned with the agent's action set.
struct MixedProfile {
  std::vector<std::vector<double>> strategies;
};

class ActionGraphGame {
 public:
  ActionGraphGame(int num_agents, std::vector<std::string> actions,
                  std::vector<std::vector<int>> action_sets,
                  std::vector<std::vector<int>> neighbors, UtilityFunction utility);

  int num_agents() const { return num_agents_; }
  int num_actions() const { return static_cast<int>(actions_.size()); }
  const std::vector<std::string>& actions() const { return actions_; }
  const std::vector<std::vector<int>>& action_sets() const { return action_sets_; }
  const std::vector<int>& action_set(int agent) const { return action_sets_.at(agent); }
  const std::vector<std::vector<int>>& neighbors() const { return neighbors_; }
  const std::vector<int>& neighbors(int action) const { return neighbors_.at(action); }
  const UtilityFunction& utility() const { return utility_; }
  bool is_linear() const { return std::holds_alternative<LinearUtility>(utility_); }

  // Maximum |neighbors(s)| over all actions.
  int max_in_degree() const { return max_in_degree_; }

  const ValidationReport& validation() const { return report_; }
  bool valid() const { return report_.ok(); }
  void require_valid() const;

  // True when every agent has the same ordered action set.
  bool has_shared_action_sets() const;

  const ProjectedView& view(int action) const { return views_.at(action); }

  // Flattened strategy coordinates: agent-major, action-set order within.
  int dimension() const { return dimension_; }
  int offset(int agent) const { return offsets_.at(agent); }
  std::vector<std::pair<int, int>> strategy_order() const;
  // Position of `action` within the agent's action set, or -1.
  int local_index(int agent, int action) const;

  // Payoff for choosing `action` given counts over neighbors(action).
  // Throws GameError when a table entry is missing.
  double utility(int action, std::span<const int> neighbor_counts) const;
  // f_{s, neighbors[s][position]}(count); linear games only.
  double linear_term(int action, int position, int count) const;
  // Lower and upper bounds on every payoff the game can produce.
  std::pair<double, double> utility_bounds() const;

  std::optional<int> find_action(std::string_view name) const;

 private:
  void build_caches();

  int num_agents_;
  std::vector<std::string> actions_;
  std::vector<std::vector<int>> action_sets_;
  std::vector<std::vector<int>> neighbors_;
  UtilityFunction utility_;

  int max_in_degree_ = 0;
  int dimension_ = 0;
  std::vector<int> offsets_;
  std::vector<ProjectedView> views_;
  std::vector<std::unordered_map<std::uint64_t, double>> table_index_;
  std::vector<std::uint64_t> radix_;  // per action: count radix (n + 1)
  ValidationReport report_;
};

ValidationReport validate_game(const ActionGraphGame& game);

// Every count vector over neighbors[action] that some pure profile with at
// least one agent playing `action` produces. Sorted, without duplicates.
std::vector<std::vector<int>> reachable_neighbor_counts(
    int num_agents, const std::vector<std::vector<int>>& action_sets,
    const std::vector<std::vector<int>>& neighbors, int action);

// `pure_profile[i]` is the action (global index) chosen by agent i.
Distribution distribution_of(const ActionGraphGame& game, std::span<const int> pure_profile);

ProjectedView make_view(int anchor, std::span<const int> neighbors, int num_actions);

Distribution project_distribution(const ProjectedView& view, const Distribution& full);

// Projects one agent's mixed strategy (aligned with `action_set`) onto the
// view's nodes. The result has view.node_count() entries.
std::vector<double> project_mixed_strategy(const ProjectedView& view,
                                           std::span<const int> action_set,
                                           std::span<const double> probabilities);

// A pair of agents' actions to add to a projected distribution before the
// lookup (the pinned agents of a Jacobian entry).
struct ActionPair {
  int first;
  int second;
};

// u(action, D) for a distribution carried on view(action).
double utility_eval(const ActionGraphGame& game, int action, const Distribution& projected,
                    std::optional<ActionPair> adjust = std::nullopt);

MixedProfile uniform_profile(const ActionGraphGame& game);
// Throws GameError unless every vector has the right length, non-negative
// entries and sums to one within `tolerance`.
void check_profile(const ActionGraphGame& game, const MixedProfile& profile,
                   double tolerance = 1e-12);
std::vector<double> flatten(const MixedProfile& profile);
MixedProfile unflatten(const ActionGraphGame& game, std::span<const double> flat);

}  // namespace agg
