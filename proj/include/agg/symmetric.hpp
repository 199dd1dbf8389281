#pragma once

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "agg/game.hpp"
#include "agg/types.hpp"

namespace agg {

// One agent moving from part `from` to part `to` of a composition.
struct Move {
  int from;
  int to;
};

// Hamiltonian walk over the compositions of `total` into `parts` non-negative
// parts, starting at (total, 0, ..., 0). Every step moves a single unit.
//
// The order is a nested reflected ("lawnmower") odometer: the last part
// climbs 0..total once, and below it each prefix of parts is swept forward
// or backward depending on the parity of the part above it. Reversing the
// sweep is what keeps the jump between blocks a single unit move.
class CompositionWalk {
 public:
  CompositionWalk(int total, int parts);

  const std::vector<int>& current() const { return counts_; }
  int total() const { return total_; }
  int parts() const { return static_cast<int>(counts_.size()); }
  // Number of compositions, i.e. the number of nodes the walk visits.
  std::uint64_t length() const;

  // Applies and returns the next move, or nullopt once every composition
  // has been visited.
  std::optional<Move> next();

 private:
  int total_;
  std::vector<int> counts_;
  std::vector<char> forward_;  // sweep direction of each prefix, refreshed per step
  std::vector<int> prefix_;
};

// Number of profiles in the class of a distribution: n!/prod D(a)!.
boost::multiprecision::cpp_int class_size(std::span<const int> counts);

// Probability of one representative profile: prod sigma(a)^D(a), 0^0 = 1.
double symmetric_profile_prob(std::span<const double> strategy, std::span<const int> counts);

// class_size * symmetric_profile_prob.
double symmetric_distribution_prob(std::span<const double> strategy, std::span<const int> counts);

// Probability of the distribution reached by `move` from `counts`, given the
// probability of `counts`. Returns nullopt when strategy[move.from] is zero
// (the caller recomputes directly).
std::optional<double> distribution_prob_step(double probability, std::span<const double> strategy,
                                             std::span<const int> counts, Move move);

// Jacobian shared by every ordered agent pair under a symmetric profile.
// Rows and columns follow `actions` (the common action set).
struct SymmetricJacobian {
  Eigen::MatrixXd values;
  std::vector<int> actions;
  std::vector<double> strategy;
  EvalCounters counters;
  // Utility evaluations spent on each entry of a row.
  std::vector<std::uint64_t> row_entry_evals;
};

// Requires identical action sets for all agents; `strategy` follows that set.
SymmetricJacobian jacobian_symmetric(const ActionGraphGame& game,
                                     std::span<const double> strategy);

// V_*(sigma): expected payoff of each shared action when the other n-1 agents
// all play `strategy`.
Eigen::VectorXd expected_payoffs_symmetric(const ActionGraphGame& game,
                                           std::span<const double> strategy,
                                           EvalCounters* counters = nullptr);

// Regret of the profile where every agent plays `strategy`.
RegretReport symmetric_regret(const ActionGraphGame& game, std::span<const double> strategy);

}  // namespace agg
