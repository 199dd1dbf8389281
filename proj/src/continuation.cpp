#include "agg/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "agg/payoff.hpp"
#include "agg/symmetric.hpp"

namespace agg {

namespace {

// Threshold tau with R(v) = max(v - tau, 0).
double simplex_threshold(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    cumulative += sorted[j];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) tau = candidate;
  }
  return tau;
}

bool on_simplex(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) {
    if (!(v >= 0.0)) return false;
    sum += v;
  }
  return std::abs(sum - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon() *
                                    static_cast<double>(values.size());
}

double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

std::vector<double> project_to_simplex(std::span<const double> values) {
  std::vector<double> out(values.begin(), values.end());
  if (out.empty() || on_simplex(values)) return out;
  const double tau = simplex_threshold(values);
  int positive = 0;
  for (double& v : out) {
    v = std::max(v - tau, 0.0);
    if (v > 0.0) ++positive;
  }
  if (positive == 1) {
    for (double& v : out) v = v > 0.0 ? 1.0 : 0.0;
  }
  return out;
}

Eigen::VectorXd retract(const Eigen::VectorXd& w, std::span<const int> block_sizes) {
  Eigen::VectorXd sigma(w.size());
  Eigen::Index offset = 0;
  for (int size : block_sizes) {
    const auto projected = project_to_simplex(std::span<const double>(w.data() + offset, size));
    for (int k = 0; k < size; ++k) sigma[offset + k] = projected[k];
    offset += size;
  }
  return sigma;
}

MixedProfile retract(const ActionGraphGame& game, const Eigen::VectorXd& w) {
  const auto sizes = block_sizes(game);
  const Eigen::VectorXd sigma = retract(w, sizes);
  return unflatten(game, std::span<const double>(sigma.data(), sigma.size()));
}

std::vector<char> retract_support(const Eigen::VectorXd& w, std::span<const int> block_sizes,
                                  double tie_tolerance) {
  std::vector<char> active(w.size(), 0);
  Eigen::Index offset = 0;
  for (int size : block_sizes) {
    std::span<const double> block(w.data() + offset, size);
    const double tau = simplex_threshold(block);
    for (int k = 0; k < size; ++k) active[offset + k] = block[k] - tau > tie_tolerance ? 1 : 0;
    offset += size;
  }
  return active;
}

Eigen::MatrixXd retract_jacobian(const Eigen::VectorXd& w, std::span<const int> block_sizes,
                                 double tie_tolerance) {
  return retract_jacobian(retract_support(w, block_sizes, tie_tolerance), block_sizes);
}

Eigen::MatrixXd retract_jacobian(const std::vector<char>& active,
                                 std::span<const int> block_sizes) {
  const auto m = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd jacobian = Eigen::MatrixXd::Zero(m, m);
  Eigen::Index offset = 0;
  for (int size : block_sizes) {
    int support = 0;
    for (int k = 0; k < size; ++k) support += active[offset + k];
    for (int r = 0; r < size; ++r) {
      if (!active[offset + r]) continue;
      for (int c = 0; c < size; ++c) {
        if (!active[offset + c]) continue;
        jacobian(offset + r, offset + c) = (r == c ? 1.0 : 0.0) - 1.0 / support;
      }
    }
    offset += size;
  }
  return jacobian;
}

std::vector<int> block_sizes(const ActionGraphGame& game) {
  std::vector<int> sizes;
  for (const auto& set : game.action_sets()) sizes.push_back(static_cast<int>(set.size()));
  return sizes;
}

Eigen::VectorXd Bonus::vector(std::span<const int> block_sizes) const {
  const int m = std::accumulate(block_sizes.begin(), block_sizes.end(), 0);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  int offset = 0;
  for (std::size_t i = 0; i < block_sizes.size(); ++i) {
    b[offset + designated.at(i)] = magnitude.at(i);
    offset += block_sizes[i];
  }
  return b;
}

// ---------------------------------------------------------------------------

int Homotopy::dimension() const {
  const auto& sizes = blocks();
  return std::accumulate(sizes.begin(), sizes.end(), 0);
}

Eigen::VectorXd Homotopy::residual(const Eigen::VectorXd& w, double lambda,
                                   const Eigen::VectorXd& bonus) const {
  const Eigen::VectorXd sigma = retract(w, blocks());
  return w - sigma - (payoffs(sigma) + lambda * bonus);
}

Eigen::MatrixXd Homotopy::gradient(const Eigen::VectorXd& w, const Eigen::VectorXd& bonus,
                                   double tie_tolerance) const {
  return gradient_on_support(w, bonus, retract_support(w, blocks(), tie_tolerance));
}

Eigen::MatrixXd Homotopy::gradient_on_support(const Eigen::VectorXd& w,
                                              const Eigen::VectorXd& bonus,
                                              const std::vector<char>& active) const {
  const int m = dimension();
  const Eigen::VectorXd sigma = retract(w, blocks());
  const Eigen::MatrixXd dR = retract_jacobian(active, blocks());
  Eigen::MatrixXd result(m, m + 1);
  result.leftCols(m) = Eigen::MatrixXd::Identity(m, m) -
                       (Eigen::MatrixXd::Identity(m, m) + payoff_jacobian(sigma)) * dR;
  result.col(m) = -bonus;
  return result;
}

double Homotopy::regret(const Eigen::VectorXd& sigma) const {
  const Eigen::VectorXd values = payoffs(sigma);
  double worst = 0.0;
  Eigen::Index offset = 0;
  for (int size : blocks()) {
    const auto v = values.segment(offset, size);
    const double current = sigma.segment(offset, size).dot(v);
    worst = std::max(worst, v.maxCoeff() - current);
    offset += size;
  }
  return worst;
}

GameHomotopy::GameHomotopy(const ActionGraphGame& game, JacobianMethod method,
                           EngineOptions engine)
    : game_(game), method_(method), engine_(engine), blocks_(block_sizes(game)) {
  game.require_valid();
  if (method == JacobianMethod::symmetric) {
    throw std::invalid_argument("the full system needs a naive, projected or partitioned method");
  }
}

Eigen::VectorXd GameHomotopy::payoffs(const Eigen::VectorXd& sigma) const {
  const MixedProfile profile = unflatten(game_, std::span<const double>(sigma.data(), sigma.size()));
  return expected_payoffs(game_, profile, engine_);
}

Eigen::MatrixXd GameHomotopy::payoff_jacobian(const Eigen::VectorXd& sigma) const {
  const MixedProfile profile = unflatten(game_, std::span<const double>(sigma.data(), sigma.size()));
  return compute_jacobian(game_, profile, method_, engine_).values;
}

SymmetricHomotopy::SymmetricHomotopy(const ActionGraphGame& game) : game_(game) {
  game.require_valid();
  if (!game.has_shared_action_sets()) {
    throw GameError("symmetric mode needs identical action sets for all agents");
  }
  blocks_ = {static_cast<int>(game.action_set(0).size())};
}

Eigen::VectorXd SymmetricHomotopy::payoffs(const Eigen::VectorXd& sigma) const {
  return expected_payoffs_symmetric(game_, std::span<const double>(sigma.data(), sigma.size()));
}

Eigen::MatrixXd SymmetricHomotopy::payoff_jacobian(const Eigen::VectorXd& sigma) const {
  const auto pairwise =
      jacobian_symmetric(game_, std::span<const double>(sigma.data(), sigma.size()));
  return static_cast<double>(game_.num_agents() - 1) * pairwise.values;
}

Eigen::VectorXd residual_F(const ActionGraphGame& game, const Eigen::VectorXd& w, double lambda,
                           const Eigen::VectorXd& bonus, JacobianMethod method,
                           const EngineOptions& engine) {
  return GameHomotopy(game, method, engine).residual(w, lambda, bonus);
}

Eigen::MatrixXd grad_F(const ActionGraphGame& game, const Eigen::VectorXd& w, double /*lambda*/,
                       const Eigen::VectorXd& bonus, JacobianMethod method,
                       const EngineOptions& engine) {
  return GameHomotopy(game, method, engine).gradient(w, bonus);
}

// ---------------------------------------------------------------------------

double bonus_magnitude(const ActionGraphGame& game) {
  const auto [lo, hi] = game.utility_bounds();
  const double n = game.num_agents();
  return 2.0 * (n * hi - n * lo + 1.0);
}

namespace {

// Tiny reproducible jitter on the bonus sizes keeps the path away from
// measure-zero degeneracies.
std::vector<double> jittered_magnitudes(double magnitude, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> out;
  for (std::size_t i = 0; i < count; ++i) {
    const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    out.push_back(magnitude * (1.0 + 1e-9 * unit));
  }
  return out;
}

int argmax_first(const Eigen::VectorXd& values, Eigen::Index offset, int size) {
  int best = 0;
  for (int k = 1; k < size; ++k) {
    if (values[offset + k] > values[offset + best]) best = k;
  }
  return best;
}

StartPoint finish_start(const Homotopy& homotopy, Bonus bonus) {
  StartPoint start;
  const auto& sizes = homotopy.blocks();
  start.bonus_vector = bonus.vector(sizes);
  start.bonus = std::move(bonus);
  Eigen::VectorXd pure = Eigen::VectorXd::Zero(homotopy.dimension());
  int offset = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    pure[offset + start.bonus.designated[i]] = 1.0;
    offset += sizes[i];
  }
  start.point.w = pure + homotopy.payoffs(pure) + start.bonus_vector;
  start.point.lambda = 1.0;
  return start;
}

}  // namespace

StartPoint make_start(const ActionGraphGame& game, std::optional<std::vector<int>> designated,
                      const SolverOptions& options) {
  game.require_valid();
  const GameHomotopy homotopy(game, options.method == JacobianMethod::symmetric
                                        ? JacobianMethod::partitioned
                                        : options.method,
                              options.engine);
  const auto sizes = block_sizes(game);
  Bonus bonus;
  const double magnitude = bonus_magnitude(game);
  if (designated) {
    if (static_cast<int>(designated->size()) != game.num_agents()) {
      throw GameError("need one designated action per agent");
    }
    for (int i = 0; i < game.num_agents(); ++i) {
      const int local = game.local_index(i, (*designated)[i]);
      if (local < 0) {
        throw GameError("agent " + std::to_string(i) + " cannot play the designated action");
      }
      bonus.designated.push_back(local);
    }
    bonus.magnitude.assign(sizes.size(), magnitude);
  } else {
    for (int size : sizes) {
      if (size == 0) throw GameError("cannot choose a bonus action from an empty action set");
    }
    const MixedProfile uniform = uniform_profile(game);
    const Eigen::VectorXd values = expected_payoffs(game, uniform, options.engine);
    for (int i = 0; i < game.num_agents(); ++i) {
      bonus.designated.push_back(argmax_first(values, game.offset(i), sizes[i]));
    }
    bonus.magnitude = jittered_magnitudes(magnitude, sizes.size(), options.seed);
  }
  return finish_start(homotopy, std::move(bonus));
}

StartPoint make_start_symmetric(const ActionGraphGame& game, std::optional<int> designated,
                                const SolverOptions& options) {
  const SymmetricHomotopy homotopy(game);
  const auto& shared = game.action_set(0);
  const int size = static_cast<int>(shared.size());
  Bonus bonus;
  const double magnitude = bonus_magnitude(game);
  if (designated) {
    const int local = game.local_index(0, *designated);
    if (local < 0) throw GameError("the designated action is not in the shared action set");
    bonus.designated = {local};
    bonus.magnitude = {magnitude};
  } else {
    if (size == 0) throw GameError("cannot choose a bonus action from an empty action set");
    const std::vector<double> uniform(size, 1.0 / size);
    const Eigen::VectorXd values = expected_payoffs_symmetric(game, uniform);
    bonus.designated = {argmax_first(values, 0, size)};
    bonus.magnitude = jittered_magnitudes(magnitude, 1, options.seed);
  }
  return finish_start(homotopy, std::move(bonus));
}

// ---------------------------------------------------------------------------

namespace {

// Signed distances of w to the walls of the support cell `active`: for an
// active coordinate its value under the affine extension of R, for an
// inactive one the gap tau - w_k. All are non-negative inside the cell.
Eigen::VectorXd cell_slack(const Eigen::VectorXd& w, std::span<const int> blocks,
                           const std::vector<char>& active) {
  Eigen::VectorXd slack(w.size());
  Eigen::Index offset = 0;
  for (int size : blocks) {
    double sum = 0.0;
    int support = 0;
    for (int k = 0; k < size; ++k) {
      if (active[offset + k]) {
        sum += w[offset + k];
        ++support;
      }
    }
    const double tau = (sum - 1.0) / support;
    for (int k = 0; k < size; ++k) {
      const double value = w[offset + k] - tau;
      slack[offset + k] = active[offset + k] ? value : -value;
    }
    offset += size;
  }
  return slack;
}

class PathTracer {
 public:
  PathTracer(const Homotopy& homotopy, const Eigen::VectorXd& bonus, const SolverOptions& options)
      : h_(homotopy), bonus_(bonus), options_(options), m_(homotopy.dimension()) {}

  PathResult run(const PathPoint& start) {
    Eigen::VectorXd x(m_ + 1);
    x << start.w, start.lambda;
    support_ = retract_support(start.w, h_.blocks(), 0.0);
    record(x, max_abs(h_.residual(start.w, start.lambda, bonus_)));

    Eigen::VectorXd tangent = tangent_at(x, support_);
    if (start.tangent.size() == m_ + 1) {
      if (tangent.dot(start.tangent) < 0.0) tangent = -tangent;
    } else if (tangent[m_] > 0.0) {
      tangent = -tangent;  // start by decreasing lambda
    }

    double step = options_.initial_step;
    int streak = 0;
    int idle_events = 0;
    while (diag_.steps < options_.max_steps) {
      Eigen::VectorXd y;
      const Outcome outcome = attempt(x, tangent, step, y);
      if (outcome == Outcome::inside) {
        ++diag_.steps;
        diag_.arclength += (y - x).norm();
        record(y, max_abs(h_.residual(y.head(m_), y[m_], bonus_)));
        if (y[m_] <= 0.0) return finish(x, y);
        Eigen::VectorXd next = tangent_at(y, support_);
        if (next.dot(tangent) < 0.0) next = -next;
        x = std::move(y);
        tangent = std::move(next);
        idle_events = 0;
        if (++streak >= 2) {
          step = std::min(step * 1.5, options_.max_step);
          streak = 0;
        }
        continue;
      }
      streak = 0;
      auto reject = [&] {
        ++diag_.rejected_steps;
        step *= 0.5;
        if (step < options_.min_step) {
          std::ostringstream what;
          what << "path stall: step size fell below " << options_.min_step;
          fail(what.str(), x, tangent, "stalled");
        }
      };
      if (outcome == Outcome::failed && exit_distance(x, tangent) >= step) {
        reject();
        continue;
      }

      // The path leaves the current support cell within this step.
      Eigen::VectorXd boundary;
      const double reached = locate_wall(x, tangent, step, boundary);
      const Eigen::VectorXd wall_tangent =
          reached > 0.0 ? oriented(tangent_at(boundary, support_), tangent) : tangent;
      const int k = next_wall(boundary, wall_tangent);
      if (k < 0) {
        reject();
        continue;
      }
      snap_to_wall(boundary, k, wall_tangent);
      if (reached > 0.0) {
        ++diag_.steps;
        diag_.arclength += (boundary - x).norm();
        record(boundary, max_abs(h_.residual(boundary.head(m_), boundary[m_], bonus_)));
        if (boundary[m_] <= 0.0) return finish(x, boundary);
        idle_events = 0;
      } else if (++idle_events > 4 * m_ + 4) {
        fail("path stall: support keeps changing without progress", x, tangent, "stalled");
      }
      x = std::move(boundary);
      support_[k] = !support_[k];
      ++diag_.support_changes;
      tangent = enter_cell(x, k, wall_tangent);
    }
    fail("path step budget of " + std::to_string(options_.max_steps) + " steps exhausted", x,
         tangent, "max_steps");
  }

 private:
  enum class Outcome { inside, outside, failed };

  Eigen::MatrixXd gradient(const Eigen::VectorXd& x, const std::vector<char>& active) const {
    return h_.gradient_on_support(x.head(m_), bonus_, active);
  }

  Eigen::VectorXd tangent_at(const Eigen::VectorXd& x, const std::vector<char>& active) const {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(gradient(x, active), Eigen::ComputeFullV);
    Eigen::VectorXd t = svd.matrixV().col(m_);
    return t / t.norm();
  }

  static Eigen::VectorXd oriented(Eigen::VectorXd t, const Eigen::VectorXd& previous) {
    if (t.dot(previous) < 0.0) t = -t;
    return t;
  }

  // F on the smooth extension of the current cell: R replaced by its affine
  // form for the traced support. Inactive coordinates then stay pinned to
  // their walls even where the solution set is locally not a curve. Falls
  // back to the true F once an active coordinate would turn negative.
  Eigen::VectorXd cell_residual(const Eigen::VectorXd& w, double lambda) const {
    Eigen::VectorXd sigma = cell_slack(w, h_.blocks(), support_);
    for (int k = 0; k < m_; ++k) {
      if (!support_[k]) {
        sigma[k] = 0.0;
      } else if (sigma[k] < 0.0) {
        return h_.residual(w, lambda, bonus_);
      }
    }
    return w - sigma - (h_.payoffs(sigma) + lambda * bonus_);
  }

  Eigen::VectorXd slack(const Eigen::VectorXd& x, const std::vector<char>& active) const {
    return cell_slack(x.head(m_), h_.blocks(), active);
  }

  // Rate of change of every wall slack when moving along t inside `active`.
  Eigen::VectorXd slack_rate(const Eigen::VectorXd& t, const std::vector<char>& active) const {
    Eigen::VectorXd shifted = Eigen::VectorXd::Zero(m_);
    const Eigen::VectorXd base = cell_slack(shifted, h_.blocks(), active);
    shifted = t.head(m_);
    return cell_slack(shifted, h_.blocks(), active) - base;
  }

  bool in_cell(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd s = slack(x, support_);
    const double scale = std::max(1.0, max_abs(x.head(m_)));
    return s.minCoeff() >= -kWallSlack * scale;
  }

  // Moves a located boundary point exactly onto wall k: Newton on the cell
  // system plus slack_k = 0, keeping the point on the hyperplane through it
  // orthogonal to t. Leaves the point alone if that does not converge.
  void snap_to_wall(Eigen::VectorXd& boundary, int k, const Eigen::VectorXd& t) {
    Eigen::RowVectorXd wall = Eigen::RowVectorXd::Zero(m_ + 1);
    for (int j = 0; j < m_; ++j) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(m_ + 1);
      e[j] = 1.0;
      wall[j] = slack_rate(e, support_)[k];
    }
    const Eigen::VectorXd anchor = boundary;
    Eigen::VectorXd z = boundary;
    auto system = [&](const Eigen::VectorXd& y) {
      Eigen::VectorXd r(m_ + 2);
      r.head(m_) = cell_residual(y.head(m_), y[m_]);
      r[m_] = slack(y, support_)[k];
      r[m_ + 1] = t.dot(y - anchor);
      return r;
    };
    Eigen::VectorXd r = system(z);
    for (int iteration = 0; iteration < options_.max_corrector_iterations; ++iteration) {
      if (max_abs(r) <= 1e-2 * options_.corrector_tolerance) break;
      Eigen::MatrixXd a(m_ + 2, m_ + 1);
      a.topRows(m_) = gradient(z, support_);
      a.row(m_) = wall;
      a.row(m_ + 1) = t.transpose();
      const Eigen::VectorXd delta = a.colPivHouseholderQr().solve(-r);
      if (!delta.allFinite()) return;
      z += delta;
      r = system(z);
    }
    if (max_abs(r.head(m_)) > options_.corrector_tolerance || std::abs(r[m_]) > kWallSlack) return;
    if ((z - anchor).norm() > 1e3 * kWallPrecision * std::max(1.0, max_abs(anchor.head(m_))) +
                                  1e-6) {
      return;
    }
    // Keep the other walls respected.
    Eigen::VectorXd s = slack(z, support_);
    s[k] = 0.0;
    if (s.minCoeff() < -kWallSlack * std::max(1.0, max_abs(z.head(m_)))) return;
    boundary = std::move(z);
  }

  // Arclength along the straight predictor before it leaves the cell.
  double exit_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& t) const {
    const Eigen::VectorXd s = slack(x, support_);
    const Eigen::VectorXd rate = slack_rate(t, support_);
    double distance = std::numeric_limits<double>::infinity();
    for (int k = 0; k < m_; ++k) {
      if (rate[k] < 0.0) distance = std::min(distance, std::max(0.0, s[k]) / -rate[k]);
    }
    return distance;
  }

  Outcome attempt(const Eigen::VectorXd& x, const Eigen::VectorXd& t, double step,
                  Eigen::VectorXd& y) {
    const Eigen::VectorXd predicted = x + step * t;
    if (!correct(predicted, t, y) || (y - predicted).norm() > 2.0 * step + 1e-8) {
      return Outcome::failed;
    }
    return in_cell(y) ? Outcome::inside : Outcome::outside;
  }

  // Bisects the step length for the last corrected point still inside the
  // cell. Returns its distance along the predictor (0 when x itself is the
  // last such point).
  double locate_wall(const Eigen::VectorXd& x, const Eigen::VectorXd& t, double step,
                     Eigen::VectorXd& boundary) {
    double lo = 0.0;
    double hi = step;
    boundary = x;
    while (hi - lo > kWallPrecision * std::max(1.0, hi)) {
      const double mid = 0.5 * (lo + hi);
      Eigen::VectorXd y;
      if (attempt(x, t, mid, y) == Outcome::inside) {
        lo = mid;
        boundary = std::move(y);
      } else {
        hi = mid;
      }
    }
    return lo;
  }

  // The wall the path hits first when moving along t from x, or -1 when no
  // wall is being approached.
  int next_wall(const Eigen::VectorXd& x, const Eigen::VectorXd& t) const {
    const Eigen::VectorXd s = slack(x, support_);
    const Eigen::VectorXd rate = slack_rate(t, support_);
    int best = -1;
    double best_time = std::numeric_limits<double>::infinity();
    const double scale = std::max(1.0, max_abs(x.head(m_)));
    for (int k = 0; k < m_; ++k) {
      if (rate[k] >= -1e-14) continue;
      const double time = std::max(0.0, s[k]) / -rate[k];
      if (time < best_time) {
        best_time = time;
        best = k;
      }
    }
    // Only walls within reach of the bisection accuracy count.
    if (best >= 0 && best_time > 1e3 * kWallPrecision * scale) return -1;
    return best;
  }

  // Tangent of the new cell after coordinate k toggled, pointing into it.
  Eigen::VectorXd enter_cell(const Eigen::VectorXd& x, int k, const Eigen::VectorXd& previous) const {
    Eigen::VectorXd t = tangent_at(x, support_);
    const double rate = slack_rate(t, support_)[k];
    if (std::abs(rate) > 1e-12) return rate > 0.0 ? t : Eigen::VectorXd(-t);
    return oriented(std::move(t), previous);
  }

  // Damped Newton on F(w, lambda) = 0 plus the hyperplane through
  // `predicted` orthogonal to `tangent`, linearized on the current cell.
  bool correct(const Eigen::VectorXd& predicted, const Eigen::VectorXd& tangent,
               Eigen::VectorXd& y) {
    y = predicted;
    auto augmented = [&](const Eigen::VectorXd& z) {
      Eigen::VectorXd r(m_ + 1);
      r.head(m_) = cell_residual(z.head(m_), z[m_]);
      r[m_] = tangent.dot(z - predicted);
      return r;
    };
    auto converged = [&](const Eigen::VectorXd& r, double tolerance) {
      return max_abs(r.head(m_)) <= tolerance && std::abs(r[m_]) <= 1e-8;
    };
    Eigen::VectorXd r = augmented(y);
    for (int iteration = 0; iteration < options_.max_corrector_iterations; ++iteration) {
      if (converged(r, 1e-2 * options_.corrector_tolerance)) return true;
      ++diag_.corrector_iterations;
      Eigen::MatrixXd a(m_ + 1, m_ + 1);
      a.topRows(m_) = gradient(y, support_);
      a.row(m_) = tangent.transpose();
      const Eigen::VectorXd delta = a.partialPivLu().solve(-r);
      if (!delta.allFinite()) break;

      double damping = 1.0;
      bool improved = false;
      while (damping >= 1.0 / 16.0) {
        Eigen::VectorXd trial = y + damping * delta;
        Eigen::VectorXd trial_r = augmented(trial);
        if (max_abs(trial_r) < max_abs(r)) {
          y = std::move(trial);
          r = std::move(trial_r);
          improved = true;
          break;
        }
        damping *= 0.5;
      }
      if (!improved) break;
    }
    return converged(r, options_.corrector_tolerance);
  }

  // Interpolates to lambda = 0 between the last two points and corrects with
  // lambda frozen.
  PathResult finish(const Eigen::VectorXd& before, const Eigen::VectorXd& after) {
    const double fraction =
        before[m_] == after[m_] ? 1.0 : before[m_] / (before[m_] - after[m_]);
    Eigen::VectorXd w = before.head(m_) + fraction * (after.head(m_) - before.head(m_));
    Eigen::VectorXd r = cell_residual(w, 0.0);
    for (int iteration = 0; iteration < 4 * options_.max_corrector_iterations; ++iteration) {
      if (max_abs(r) <= 1e-2 * options_.corrector_tolerance) break;
      ++diag_.corrector_iterations;
      const Eigen::MatrixXd g = h_.gradient_on_support(w, bonus_, support_).leftCols(m_);
      const Eigen::VectorXd delta = g.colPivHouseholderQr().solve(-r);
      if (!delta.allFinite()) break;
      double damping = 1.0;
      bool improved = false;
      while (damping >= 1.0 / 64.0) {
        const Eigen::VectorXd trial = w + damping * delta;
        const Eigen::VectorXd trial_r = cell_residual(trial, 0.0);
        if (max_abs(trial_r) < max_abs(r)) {
          w = trial;
          r = trial_r;
          improved = true;
          break;
        }
        damping *= 0.5;
      }
      if (!improved) break;
    }
    PathResult result;
    result.w = w;
    result.sigma = retract(w, h_.blocks());
    diag_.final_lambda = 0.0;
    diag_.residual = max_abs(h_.residual(w, 0.0, bonus_));
    diag_.regret = h_.regret(result.sigma);
    diag_.status = diag_.regret <= options_.eps ? "converged" : "regret_above_eps";
    if (options_.record_trace) {
      diag_.lambda_trace.push_back(0.0);
      diag_.residual_trace.push_back(diag_.residual);
    }
    result.diagnostics = diag_;
    return result;
  }

  void record(const Eigen::VectorXd& x, double residual) {
    diag_.final_lambda = x[m_];
    diag_.residual = residual;
    if (!options_.record_trace) return;
    diag_.lambda_trace.push_back(x[m_]);
    diag_.residual_trace.push_back(residual);
  }

  [[noreturn]] void fail(const std::string& what, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& tangent, const char* status) {
    diag_.status = status;
    PathPoint last;
    last.w = x.head(m_);
    last.lambda = x[m_];
    last.tangent = tangent;
    throw PathFailure(what, std::move(last), diag_);
  }

  static constexpr double kWallPrecision = 1e-13;
  // Slack (relative to |w|) by which a point may sit past a wall of its cell.
  static constexpr double kWallSlack = 1e-12;

  const Homotopy& h_;
  const Eigen::VectorXd& bonus_;
  const SolverOptions& options_;
  int m_;
  std::vector<char> support_;  // active coordinates of the cell being traced
  PathDiagnostics diag_;
};

}  // namespace

PathResult follow_path(const Homotopy& homotopy, const PathPoint& start,
                       const Eigen::VectorXd& bonus, const SolverOptions& options) {
  const double residual = max_abs(homotopy.residual(start.w, start.lambda, bonus));
  if (residual > std::max(1e-9, 10.0 * options.corrector_tolerance)) {
    throw std::invalid_argument("start point is not on the path (residual " +
                                std::to_string(residual) + ")");
  }
  return PathTracer(homotopy, bonus, options).run(start);
}

SolveResult trace_path(const ActionGraphGame& game, const StartPoint& start,
                       const SolverOptions& options) {
  const GameHomotopy homotopy(game, options.method, options.engine);
  const PathResult path = follow_path(homotopy, start.point, start.bonus_vector, options);
  SolveResult result;
  result.profile = unflatten(game, std::span<const double>(path.sigma.data(), path.sigma.size()));
  result.regret = engine_regret(game, result.profile, options.engine);
  result.diagnostics = path.diagnostics;
  return result;
}

MixedProfile SymmetricSolveResult::profile(const ActionGraphGame& game) const {
  MixedProfile out;
  out.strategies.assign(game.num_agents(), strategy);
  return out;
}

SymmetricSolveResult trace_path_symmetric(const ActionGraphGame& game, const StartPoint& start,
                                          const SolverOptions& options) {
  const SymmetricHomotopy homotopy(game);
  const PathResult path = follow_path(homotopy, start.point, start.bonus_vector, options);
  SymmetricSolveResult result;
  result.strategy.assign(path.sigma.data(), path.sigma.data() + path.sigma.size());
  result.regret = symmetric_regret(game, result.strategy);
  result.diagnostics = path.diagnostics;
  return result;
}

}  // namespace agg
