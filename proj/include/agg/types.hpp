#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace agg {

enum class JacobianMethod { naive, projected, partitioned, symmetric };

std::string_view to_string(JacobianMethod method);
// Throws std::invalid_argument for unknown names.
JacobianMethod parse_method(std::string_view name);

// Thrown when an enumeration would visit more profiles than allowed.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EvalCounters {
  std::uint64_t utility_evals = 0;
  std::uint64_t probability_evals = 0;
  std::uint64_t swap_updates = 0;  // profile probabilities obtained by a transposition

  EvalCounters& operator+=(const EvalCounters& other) {
    utility_evals += other.utility_evals;
    probability_evals += other.probability_evals;
    swap_updates += other.swap_updates;
    return *this;
  }
};

struct EngineOptions {
  unsigned threads = 1;
  // Largest number of opponent profiles one entry may enumerate.
  std::uint64_t profile_cap = 10'000'000;
};

// d V^i_{s_i} / d sigma_{i'}(s_{i'}) over flattened strategy coordinates.
// Rows and columns follow `order` (agent, action) pairs.
struct PayoffJacobian {
  Eigen::MatrixXd values;
  std::vector<std::pair<int, int>> order;
  JacobianMethod method = JacobianMethod::naive;
  EvalCounters counters;
  // Utility evaluations spent on each entry, row-major m x m. Entries filled
  // by copying a shared representative record zero.
  std::vector<std::uint64_t> entry_utility_evals;

  int dimension() const { return static_cast<int>(values.rows()); }
  std::uint64_t entry_evals(int row, int col) const {
    return entry_utility_evals[static_cast<std::size_t>(row) * values.cols() + col];
  }
};

struct AgentRegret {
  double best_response_value = 0.0;
  double current_value = 0.0;
  double regret = 0.0;
};

struct RegretReport {
  std::vector<AgentRegret> agents;
  double max_regret = 0.0;

  bool passes(double eps) const { return max_regret <= eps; }
};

}  // namespace agg
