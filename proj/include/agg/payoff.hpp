#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>

#include "agg/game.hpp"
#include "agg/types.hpp"

namespace agg {

// Expected payoff V^i_s to `agent` for playing `action` while the others
// follow `profile`. Enumerates the opponents' projected profiles.
double expected_payoff(const ActionGraphGame& game, int agent, int action,
                       const MixedProfile& profile, const EngineOptions& options = {},
                       EvalCounters* counters = nullptr);

// All V^i_{s_i} stacked in strategy order.
Eigen::VectorXd expected_payoffs(const ActionGraphGame& game, const MixedProfile& profile,
                                 const EngineOptions& options = {},
                                 EvalCounters* counters = nullptr);

// Literal double sum over the full opponent profiles of every entry.
PayoffJacobian jacobian_naive(const ActionGraphGame& game, const MixedProfile& profile,
                              const EngineOptions& options = {});

// Same sum over profiles of the projected graph G^(s_i); one representative
// column per out-of-neighborhood group, the rest filled by share_entries.
PayoffJacobian jacobian_projected(const ActionGraphGame& game, const MixedProfile& profile,
                                  const EngineOptions& options = {});

// Projected profiles grouped by the distribution they induce: profile
// probabilities are summed per class and the utility is evaluated once per
// projected distribution.
PayoffJacobian jacobian_partitioned(const ActionGraphGame& game, const MixedProfile& profile,
                                    const EngineOptions& options = {});

// Dispatches on naive/projected/partitioned. The symmetric method lives in
// symmetric.hpp and is rejected here.
PayoffJacobian compute_jacobian(const ActionGraphGame& game, const MixedProfile& profile,
                                JacobianMethod method, const EngineOptions& options = {});

// Probability of the profile obtained by swapping the actions of agents j
// and j'. `first` and `second` are their (projected) strategies and
// `first_node`/`second_node` their current choices. Returns nullopt when a
// denominator term is zero; callers then recompute the product directly.
std::optional<double> swap_probability(double probability, std::span<const double> first,
                                       std::span<const double> second, int first_node,
                                       int second_node);

// Copies, per row block (i, s_i) and opponent i', the representative column
// of the actions outside neighbors(s_i) to all the others of that group.
PayoffJacobian share_entries(PayoffJacobian jacobian, const ActionGraphGame& game);

// Number of compositions of n_bar into k non-negative parts.
// Throws std::overflow_error when the result does not fit in 64 bits.
std::uint64_t count_projected_distributions(int n_bar, int k);

// u(action, D') for D' = D with one agent moved from node `from` to node `to`
// of view(action), given u(action, D) = `current`. Linear utilities only.
double linear_utility_shift(const ActionGraphGame& game, int action, double current,
                            const Distribution& projected, int from, int to);

// Regret of every agent computed from the engine's expected payoffs.
RegretReport engine_regret(const ActionGraphGame& game, const MixedProfile& profile,
                           const EngineOptions& options = {});

}  // namespace agg
