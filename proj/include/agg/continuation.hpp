#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "agg/game.hpp"
#include "agg/types.hpp"

namespace agg {

// Euclidean projection of `values` onto the probability simplex. Points
// already on the simplex are returned unchanged.
std::vector<double> project_to_simplex(std::span<const double> values);

// Retraction R: per-block simplex projection of an unnormalized vector.
Eigen::VectorXd retract(const Eigen::VectorXd& w, std::span<const int> block_sizes);
MixedProfile retract(const ActionGraphGame& game, const Eigen::VectorXd& w);

// dR/dw: block diagonal; on each block's active support T the centering
// matrix I - 11'/|T|, zero on clipped coordinates. A coordinate counts as
// clipped when it lies within `tie_tolerance` of the threshold.
Eigen::MatrixXd retract_jacobian(const Eigen::VectorXd& w, std::span<const int> block_sizes,
                                 double tie_tolerance = 1e-9);
// Same blocks for an explicit active-support mask.
Eigen::MatrixXd retract_jacobian(const std::vector<char>& active,
                                 std::span<const int> block_sizes);

// Active-support mask used by retract_jacobian.
std::vector<char> retract_support(const Eigen::VectorXd& w, std::span<const int> block_sizes,
                                  double tie_tolerance = 1e-9);

std::vector<int> block_sizes(const ActionGraphGame& game);

// Designated action (position within the block) and bonus size per block.
struct Bonus {
  std::vector<int> designated;
  std::vector<double> magnitude;

  Eigen::VectorXd vector(std::span<const int> block_sizes) const;
};

struct PathPoint {
  Eigen::VectorXd w;
  double lambda = 1.0;
  Eigen::VectorXd tangent;  // (dw, dlambda), unit length; empty until known
};

struct SolverOptions {
  double eps = 1e-6;
  double corrector_tolerance = 1e-10;
  double initial_step = 0.01;
  double min_step = 1e-8;
  double max_step = 0.1;
  int max_steps = 100000;
  int max_corrector_iterations = 12;
  double tie_tolerance = 1e-9;
  JacobianMethod method = JacobianMethod::partitioned;
  EngineOptions engine;
  std::uint64_t seed = 0;
  bool record_trace = true;
};

struct PathDiagnostics {
  std::string status = "running";  // converged | regret_above_eps | stalled | max_steps
  int steps = 0;
  int rejected_steps = 0;
  int corrector_iterations = 0;
  int support_changes = 0;
  double final_lambda = 1.0;
  double residual = 0.0;
  double regret = 0.0;
  double arclength = 0.0;
  std::vector<double> lambda_trace;
  std::vector<double> residual_trace;
};

// Raised when the path cannot be continued; carries the last accepted point.
class PathFailure : public std::runtime_error {
 public:
  PathFailure(const std::string& what, PathPoint last, PathDiagnostics diagnostics)
      : std::runtime_error(what), last(std::move(last)), diagnostics(std::move(diagnostics)) {}

  PathPoint last;
  PathDiagnostics diagnostics;
};

// The bonus-perturbed system F(w, lambda) = w - R(w) - (V(R(w)) + lambda b)
// for some payoff map V.
class Homotopy {
 public:
  virtual ~Homotopy() = default;

  virtual const std::vector<int>& blocks() const = 0;
  // V(sigma) stacked over blocks.
  virtual Eigen::VectorXd payoffs(const Eigen::VectorXd& sigma) const = 0;
  // dV/dsigma.
  virtual Eigen::MatrixXd payoff_jacobian(const Eigen::VectorXd& sigma) const = 0;

  int dimension() const;
  Eigen::VectorXd residual(const Eigen::VectorXd& w, double lambda,
                           const Eigen::VectorXd& bonus) const;
  // [grad_w F | dF/dlambda], m x (m + 1).
  Eigen::MatrixXd gradient(const Eigen::VectorXd& w, const Eigen::VectorXd& bonus,
                           double tie_tolerance = 1e-9) const;
  // Same with dR taken on the support cell `active` rather than read off w.
  Eigen::MatrixXd gradient_on_support(const Eigen::VectorXd& w, const Eigen::VectorXd& bonus,
                                      const std::vector<char>& active) const;
  // Largest regret over blocks of sigma against V(sigma).
  double regret(const Eigen::VectorXd& sigma) const;
};

// Full system over every agent's strategy coordinates.
class GameHomotopy : public Homotopy {
 public:
  GameHomotopy(const ActionGraphGame& game, JacobianMethod method, EngineOptions engine = {});

  const std::vector<int>& blocks() const override { return blocks_; }
  Eigen::VectorXd payoffs(const Eigen::VectorXd& sigma) const override;
  Eigen::MatrixXd payoff_jacobian(const Eigen::VectorXd& sigma) const override;

 private:
  const ActionGraphGame& game_;
  JacobianMethod method_;
  EngineOptions engine_;
  std::vector<int> blocks_;
};

// Reduced system over one shared strategy; all agents play the same vector.
class SymmetricHomotopy : public Homotopy {
 public:
  explicit SymmetricHomotopy(const ActionGraphGame& game);

  const std::vector<int>& blocks() const override { return blocks_; }
  Eigen::VectorXd payoffs(const Eigen::VectorXd& sigma) const override;
  // (n - 1) times the pairwise symmetric Jacobian: every opponent moves.
  Eigen::MatrixXd payoff_jacobian(const Eigen::VectorXd& sigma) const override;

 private:
  const ActionGraphGame& game_;
  std::vector<int> blocks_;
};

Eigen::VectorXd residual_F(const ActionGraphGame& game, const Eigen::VectorXd& w, double lambda,
                           const Eigen::VectorXd& bonus,
                           JacobianMethod method = JacobianMethod::partitioned,
                           const EngineOptions& engine = {});

Eigen::MatrixXd grad_F(const ActionGraphGame& game, const Eigen::VectorXd& w, double lambda,
                       const Eigen::VectorXd& bonus,
                       JacobianMethod method = JacobianMethod::partitioned,
                       const EngineOptions& engine = {});

struct StartPoint {
  PathPoint point;
  Bonus bonus;
  Eigen::VectorXd bonus_vector;
};

// Bonus size that makes any designated pure profile strictly dominant at
// lambda = 1: 2 (n u_max - n u_min + 1).
double bonus_magnitude(const ActionGraphGame& game);

// `designated[i]` is the action (global index) agent i is pushed towards;
// nullopt picks each agent's best response to the uniform profile.
StartPoint make_start(const ActionGraphGame& game, std::optional<std::vector<int>> designated,
                      const SolverOptions& options = {});

// Symmetric variant: one shared designated action (global index).
StartPoint make_start_symmetric(const ActionGraphGame& game, std::optional<int> designated,
                                const SolverOptions& options = {});

struct PathResult {
  Eigen::VectorXd w;
  Eigen::VectorXd sigma;
  PathDiagnostics diagnostics;
};

// Predictor-corrector continuation from lambda = 1 down to lambda = 0.
// Throws PathFailure on step underflow or when the step budget runs out.
PathResult follow_path(const Homotopy& homotopy, const PathPoint& start,
                       const Eigen::VectorXd& bonus, const SolverOptions& options);

struct SolveResult {
  MixedProfile profile;
  RegretReport regret;
  PathDiagnostics diagnostics;
};

SolveResult trace_path(const ActionGraphGame& game, const StartPoint& start,
                       const SolverOptions& options = {});

struct SymmetricSolveResult {
  std::vector<double> strategy;
  RegretReport regret;
  PathDiagnostics diagnostics;

  MixedProfile profile(const ActionGraphGame& game) const;
};

SymmetricSolveResult trace_path_symmetric(const ActionGraphGame& game, const StartPoint& start,
                                          const SolverOptions& options = {});

}  // namespace agg
