#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "agg/game.hpp"

namespace agg::test {

inline double unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform point of the simplex (normalized exponentials), strictly positive.
inline std::vector<double> random_simplex(std::size_t size, std::mt19937_64& rng) {
  std::vector<double> p(size);
  double sum = 0.0;
  for (auto& x : p) {
    x = -std::log(1.0 - unit(rng)) + 1e-3;
    sum += x;
  }
  for (auto& x : p) x /= sum;
  return p;
}

inline MixedProfile random_profile(const ActionGraphGame& game, std::mt19937_64& rng) {
  MixedProfile profile;
  for (const auto& set : game.action_sets()) {
    profile.strategies.push_back(random_simplex(set.size(), rng));
  }
  return profile;
}

inline MixedProfile replicate(const ActionGraphGame& game, const std::vector<double>& strategy) {
  return MixedProfile{std::vector<std::vector<double>>(game.num_agents(), strategy)};
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

// Shared action set {0..k-1}; nu(s) = {s, s+1 mod k}, so the in-degree is 2
// and every view has a reachable sink once k > 2.
inline ActionGraphGame ring_game(int agents, int actions, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> names;
  std::vector<std::vector<int>> neighbors;
  LinearUtility linear;
  std::vector<int> all(actions);
  for (int s = 0; s < actions; ++s) {
    all[s] = s;
    names.push_back("a" + std::to_string(s));
    neighbors.push_back({s, (s + 1) % actions});
    std::vector<std::vector<double>> f(2, std::vector<double>(agents + 1));
    for (auto& row : f) {
      for (auto& v : row) v = 2.0 * unit(rng) - 1.0;
    }
    linear.coefficients.push_back(std::move(f));
  }
  return ActionGraphGame(agents, names, std::vector<std::vector<int>>(agents, all), neighbors,
                         linear);
}

}  // namespace agg::test
