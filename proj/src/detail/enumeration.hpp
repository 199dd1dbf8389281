#pragma once

#include <string>
#include <vector>

#include "agg/game.hpp"
#include "agg/types.hpp"

namespace agg::detail {

// An opponent's choices with positive probability. For projected opponents
// `nodes` are view nodes and `projected` holds the full projected strategy;
// for full opponents `nodes` are global action indices.
struct Opponent {
  int agent = -1;
  std::vector<int> nodes;
  std::vector<double> probs;
  std::vector<double> projected;
};

inline std::vector<Opponent> projected_opponents(const ActionGraphGame& game,
                                                 const ProjectedView& view,
                                                 const MixedProfile& profile, int skip_a,
                                                 int skip_b) {
  std::vector<Opponent> opponents;
  for (int j = 0; j < game.num_agents(); ++j) {
    if (j == skip_a || j == skip_b) continue;
    Opponent o;
    o.agent = j;
    o.projected = project_mixed_strategy(view, game.action_set(j), profile.strategies[j]);
    for (int node = 0; node < view.node_count(); ++node) {
      if (o.projected[node] > 0.0) {
        o.nodes.push_back(node);
        o.probs.push_back(o.projected[node]);
      }
    }
    if (o.nodes.empty()) throw GameError("agent " + std::to_string(j) + " has no support");
    opponents.push_back(std::move(o));
  }
  return opponents;
}

inline std::vector<Opponent> full_opponents(const ActionGraphGame& game,
                                            const MixedProfile& profile, int skip_a,
                                            int skip_b) {
  std::vector<Opponent> opponents;
  for (int j = 0; j < game.num_agents(); ++j) {
    if (j == skip_a || j == skip_b) continue;
    Opponent o;
    o.agent = j;
    const auto& set = game.action_set(j);
    for (std::size_t k = 0; k < set.size(); ++k) {
      if (profile.strategies[j][k] > 0.0) {
        o.nodes.push_back(set[k]);
        o.probs.push_back(profile.strategies[j][k]);
      }
    }
    if (o.nodes.empty()) throw GameError("agent " + std::to_string(j) + " has no support");
    opponents.push_back(std::move(o));
  }
  return opponents;
}

inline void check_cap(const std::vector<Opponent>& opponents, std::uint64_t cap) {
  long double size = 1;
  for (const auto& o : opponents) size *= static_cast<long double>(o.nodes.size());
  if (size > static_cast<long double>(cap)) {
    throw CapExceeded("entry enumeration would visit about " +
                      std::to_string(static_cast<double>(size)) +
                      " opponent profiles, above the cap of " + std::to_string(cap));
  }
}

inline std::vector<int> radices(const std::vector<Opponent>& opponents) {
  std::vector<int> r;
  r.reserve(opponents.size());
  for (const auto& o : opponents) r.push_back(static_cast<int>(o.nodes.size()));
  return r;
}

// Mixed-radix counter; the last digit moves fastest.
class Odometer {
 public:
  explicit Odometer(std::vector<int> radices)
      : radices_(std::move(radices)), digits_(radices_.size(), 0) {}

  const std::vector<int>& digits() const { return digits_; }

  // Returns the most significant digit that changed, or -1 after the last
  // combination (digits wrap back to zero).
  int advance() {
    for (int j = static_cast<int>(digits_.size()) - 1; j >= 0; --j) {
      if (++digits_[j] < radices_[j]) return j;
      digits_[j] = 0;
    }
    return -1;
  }

 private:
  std::vector<int> radices_;
  std::vector<int> digits_;
};

inline double profile_probability(const std::vector<Opponent>& opponents,
                                  const std::vector<int>& digits) {
  double p = 1.0;
  for (std::size_t j = 0; j < opponents.size(); ++j) p *= opponents[j].probs[digits[j]];
  return p;
}

// Advances a projected enumeration, keeping `picks` (current node of every
// opponent) and the kept-node `counts` in sync.
inline bool step(Odometer& odometer, const std::vector<Opponent>& opponents,
                 std::vector<int>& picks, std::vector<int>& counts, int sink) {
  const int changed = odometer.advance();
  if (changed < 0) return false;
  for (std::size_t j = static_cast<std::size_t>(changed); j < opponents.size(); ++j) {
    const int node = opponents[j].nodes[odometer.digits()[j]];
    if (node == picks[j]) continue;
    if (picks[j] != sink) --counts[picks[j]];
    if (node != sink) ++counts[node];
    picks[j] = node;
  }
  return true;
}

// Same for full-graph enumeration; `counts` is indexed by action.
inline bool step_full(Odometer& odometer, const std::vector<Opponent>& opponents,
                      std::vector<int>& counts) {
  const int changed = odometer.advance();
  if (changed < 0) return false;
  for (std::size_t j = static_cast<std::size_t>(changed); j < opponents.size(); ++j) {
    const auto& o = opponents[j];
    const int digit = odometer.digits()[j];
    const int previous = o.nodes[digit == 0 ? o.nodes.size() - 1 : digit - 1];
    --counts[previous];
    ++counts[o.nodes[digit]];
  }
  return true;
}

}  // namespace agg::detail
