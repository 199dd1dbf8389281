#pragma once

#include <cstdint>
#include <vector>

#include "agg/game.hpp"
#include "agg/types.hpp"

namespace agg {

// Dense payoff tensors. payoffs[i] holds agent i's payoff for every pure
// profile, row-major over `shape` with agent 0 the slowest index.
struct NormalFormGame {
  std::vector<int> shape;
  std::vector<std::vector<double>> payoffs;

  int num_agents() const { return static_cast<int>(shape.size()); }
  std::size_t profile_count() const;
  // Row-major position of a profile given as per-agent local action indices.
  std::size_t index(const std::vector<int>& local_profile) const;
};

// Brute-force ground truth. Nothing here shares enumeration code with the
// payoff engine.
namespace oracle {

constexpr std::uint64_t kDefaultCap = 1'000'000;

// Payoff of `action` against a full-graph count vector, looked up straight
// from the stored utility description.
double utility(const ActionGraphGame& game, int action, const std::vector<int>& full_counts);

// Throws CapExceeded when the number of pure profiles exceeds `cap`.
NormalFormGame expand_normal_form(const ActionGraphGame& game, std::uint64_t cap = kDefaultCap);

// V^i_s for every agent and own action, summed over all of S_{-i}.
std::vector<std::vector<double>> expected_payoffs(const ActionGraphGame& game,
                                                  const MixedProfile& profile,
                                                  std::uint64_t cap = kDefaultCap);

// Literal double sum over S_{-i,-i'} for every entry; diagonal blocks zero.
PayoffJacobian brute_jacobian(const ActionGraphGame& game, const MixedProfile& profile,
                              std::uint64_t cap = kDefaultCap);

RegretReport verify_nash(const ActionGraphGame& game, const MixedProfile& profile,
                         std::uint64_t cap = kDefaultCap);

}  // namespace oracle
}  // namespace agg
