// Prints one PASS/FAIL line per acceptance criterion; exits non-zero if any
// criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>

#include "agg/continuation.hpp"
#include "agg/generators.hpp"
#include "agg/oracle.hpp"
#include "agg/payoff.hpp"
#include "agg/symmetric.hpp"
#include "support.hpp"

using namespace agg;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point begin) {
  return std::chrono::duration<double>(Clock::now() - begin).count();
}

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool condition, const std::string& what) {
    if (!condition && pass) {
      pass = false;
      detail = what;
    }
  }
};

ActionGraphGame random_game(std::mt19937_64& rng, std::uint64_t seed, bool shared) {
  RandomGameOptions options;
  options.agents = 2 + static_cast<int>(rng() % 3);
  options.actions = 3 + static_cast<int>(rng() % 4);
  options.max_in_degree = 1 + static_cast<int>(rng() % 3);
  options.seed = seed;
  options.shared = shared;
  options.kind = rng() % 2 == 0 ? UtilityKind::table : UtilityKind::linear;
  return generate_random(options);
}

std::uint64_t binomial(int n, int k) {
  std::uint64_t r = 1;
  for (int t = 1; t <= k; ++t) r = r * static_cast<std::uint64_t>(n - k + t) / t;
  return r;
}

// Distinct projected nodes agent j can occupy in the view of `action`.
int reachable_nodes(const ActionGraphGame& game, int action, int agent) {
  const auto& nbrs = game.neighbors(action);
  std::set<int> nodes;
  for (int t : game.action_set(agent)) {
    const auto it = std::find(nbrs.begin(), nbrs.end(), t);
    nodes.insert(it == nbrs.end() ? -1 : static_cast<int>(it - nbrs.begin()));
  }
  return static_cast<int>(nodes.size());
}

Verdict method_equivalence() {
  Verdict v;
  const auto begin = Clock::now();
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  for (std::uint64_t g = 0; g < 200; ++g) {
    const auto game = random_game(rng, g, g % 3 == 0);
    for (int p = 0; p < 3; ++p) {
      const auto profile = test::random_profile(game, rng);
      const auto brute = oracle::brute_jacobian(game, profile);
      for (auto method : {JacobianMethod::naive, JacobianMethod::projected,
                          JacobianMethod::partitioned}) {
        worst = std::max(worst, test::max_abs_diff(compute_jacobian(game, profile, method).values,
                                                   brute.values));
      }
    }
  }
  const double elapsed = seconds_since(begin);
  v.require(worst <= 1e-10, "max deviation " + std::to_string(worst));
  v.require(elapsed < 60.0, "took " + std::to_string(elapsed) + " s");
  char buf[160];
  std::snprintf(buf, sizeof buf, "200 games x 3 profiles, max |diff| %.2e, %.2f s", worst, elapsed);
  if (v.pass) v.detail = buf;
  return v;
}

Verdict symmetric_equivalence() {
  Verdict v;
  std::mt19937_64 rng(1002);
  double worst = 0.0;
  for (std::uint64_t g = 0; g < 50; ++g) {
    const auto game = random_game(rng, 5000 + g, true);
    const int k = static_cast<int>(game.action_set(0).size());
    const auto sigma = test::random_simplex(k, rng);
    const auto brute = oracle::brute_jacobian(game, test::replicate(game, sigma));
    const auto sym = jacobian_symmetric(game, sigma);
    worst = std::max(worst, test::max_abs_diff(brute.values.block(0, k, k, k), sym.values));
  }
  v.require(worst <= 1e-10, "max deviation " + std::to_string(worst));
  char buf[120];
  std::snprintf(buf, sizeof buf, "50 symmetric games, max |diff| %.2e", worst);
  if (v.pass) v.detail = buf;
  return v;
}

Verdict gradient_check() {
  Verdict v;
  std::mt19937_64 rng(1003);
  const double h = 1e-5;
  double worst = 0.0;
  for (std::uint64_t g = 0; g < 20; ++g) {
    const auto game = random_game(rng, 9000 + g, g % 2 == 0);
    const auto profile = test::random_profile(game, rng);
    const int m = game.dimension();
    const auto order = game.strategy_order();
    const auto J = jacobian_partitioned(game, profile);
    const auto N = jacobian_naive(game, profile);
    for (int col = 0; col < m; ++col) {
      // Perturb the raw coordinate sigma_{i'}(s'); V is affine in it.
      const int agent = order[col].first;
      const int local = col - game.offset(agent);
      auto plus = profile, minus = profile;
      plus.strategies[agent][local] += h;
      minus.strategies[agent][local] -= h;
      const auto vp = oracle::expected_payoffs(game, plus);
      const auto vm = oracle::expected_payoffs(game, minus);
      for (int row = 0; row < m; ++row) {
        const int i = order[row].first;
        const int k = row - game.offset(i);
        const double fd = (vp[i][k] - vm[i][k]) / (2 * h);
        for (const auto* analytic : {&J.values, &N.values}) {
          const double rel = std::abs((*analytic)(row, col) - fd) / std::max(1.0, std::abs(fd));
          worst = std::max(worst, rel);
        }
      }
    }
  }
  v.require(worst <= 1e-6, "max relative deviation " + std::to_string(worst));
  char buf[120];
  std::snprintf(buf, sizeof buf, "20 games, max relative |J - fd| %.2e", worst);
  if (v.pass) v.detail = buf;
  return v;
}

Verdict counters() {
  Verdict v;
  std::mt19937_64 rng(1004);
  // Projected: each computed entry enumerates the opponents' projected
  // profiles, bounded by (I+1)^nbar. Partitioned on shared games: one
  // evaluation per composition of nbar over the k reachable nodes.
  for (std::uint64_t g = 0; g < 30; ++g) {
    const bool shared = g % 2 == 0;
    const auto game = random_game(rng, 12000 + g, shared);
    const auto profile = test::random_profile(game, rng);
    const auto P = jacobian_projected(game, profile);
    const auto Q = jacobian_partitioned(game, profile);
    const int n = game.num_agents();
    const int nbar = n - 2;
    const double bound = std::pow(game.max_in_degree() + 1.0, nbar);
    for (int i = 0; i < n; ++i) {
      for (int s : game.action_set(i)) {
        const int row = game.offset(i) + game.local_index(i, s);
        for (int other = 0; other < n; ++other) {
          if (other == i) continue;
          std::uint64_t profiles = 1;
          for (int j = 0; j < n; ++j) {
            if (j != i && j != other) profiles *= reachable_nodes(game, s, j);
          }
          const int k = reachable_nodes(game, s, i);  // same for every agent when shared
          bool any = false;
          for (std::size_t c = 0; c < game.action_set(other).size(); ++c) {
            const int col = game.offset(other) + static_cast<int>(c);
            const auto pe = P.entry_evals(row, col);
            const auto qe = Q.entry_evals(row, col);
            if (pe == 0) continue;
            any = true;
            v.require(pe == profiles, "projected entry count differs from the profile count");
            v.require(static_cast<double>(pe) <= bound, "projected entry count above (I+1)^nbar");
            if (shared) {
              v.require(qe == binomial(nbar + k - 1, k - 1),
                        "partitioned entry count differs from C(nbar+k-1, k-1)");
            }
          }
          v.require(any, "row block without a computed entry");
        }
      }
    }
    if (shared) {
      const auto S = jacobian_symmetric(game, profile.strategies[0]);
      for (int s = 0; s < game.num_actions(); ++s) {
        const int k = reachable_nodes(game, s, 0);
        v.require(S.row_entry_evals[s] == binomial(nbar + k - 1, k - 1),
                  "symmetric row count differs from C(nbar+k-1, k-1)");
      }
    }
  }

  // Fixed in-degree 2, growing n: polynomial symmetric counter vs (I+1)^nbar.
  std::map<int, double> symmetric;
  for (int n : {10, 20, 40}) {
    const auto game = test::ring_game(n, 3, 77);
    const auto S = jacobian_symmetric(game, test::random_simplex(3, rng));
    symmetric[n] = static_cast<double>(S.counters.utility_evals);
    v.require(S.counters.utility_evals == 3 * 3 * binomial(n - 2 + 2, 2),
              "symmetric total differs from sum_s |S| C(nbar+|nu(s)|, |nu(s)|)");
  }
  const double r1 = symmetric[20] / symmetric[10];
  const double r2 = symmetric[40] / symmetric[20];
  v.require(r1 <= 4.0 * 1.1 && r2 <= 4.0 * 1.1, "symmetric counter grows faster than n^2");
  const double naive40 = std::pow(3.0, 38);
  v.require(naive40 > 1e9, "naive bound at n = 40 is not above 1e9");
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "exact entry counts on 30 games; symmetric n=10,20,40: %.0f, %.0f, %.0f "
                "(ratios %.2f, %.2f); naive bound at n=40: %.2e",
                symmetric[10], symmetric[20], symmetric[40], r1, r2, naive40);
  if (v.pass) v.detail = buf;
  return v;
}

void all_compositions(int total, int parts, std::vector<int>& prefix,
                      std::set<std::vector<int>>& out) {
  if (static_cast<int>(prefix.size()) == parts - 1) {
    prefix.push_back(total);
    out.insert(prefix);
    prefix.pop_back();
    return;
  }
  for (int c = 0; c <= total; ++c) {
    prefix.push_back(c);
    all_compositions(total - c, parts, prefix, out);
    prefix.pop_back();
  }
}

Verdict gray_walk() {
  Verdict v;
  std::mt19937_64 rng(1005);
  double worst = 0.0;
  int walks = 0;
  for (int nbar = 0; nbar <= 8; ++nbar) {
    for (int k = 1; k <= 6; ++k) {
      std::set<std::vector<int>> expected;
      std::vector<int> prefix;
      all_compositions(nbar, k, prefix, expected);
      const auto sigma = test::random_simplex(k, rng);

      CompositionWalk walk(nbar, k);
      std::set<std::vector<int>> seen{walk.current()};
      double p = symmetric_distribution_prob(sigma, walk.current());
      while (true) {
        const auto before = walk.current();
        const auto move = walk.next();
        if (!move) break;
        const auto& after = walk.current();
        int changed = 0;
        for (int a = 0; a < k; ++a) {
          const int d = after[a] - before[a];
          if (d != 0) ++changed;
          v.require(std::abs(d) <= 1, "move changes a part by more than one");
        }
        v.require(changed == 2 && after[move->from] == before[move->from] - 1 &&
                      after[move->to] == before[move->to] + 1,
                  "move is not a single unit transfer");
        v.require(seen.insert(after).second, "composition visited twice");
        p = *distribution_prob_step(p, sigma, before, *move);
        worst = std::max(worst, std::abs(p - symmetric_distribution_prob(sigma, after)));
      }
      v.require(seen == expected, "walk misses compositions");
      v.require(seen.size() == count_projected_distributions(nbar, k), "walk length mismatch");
      ++walks;
    }
  }
  v.require(worst <= 1e-12, "stepwise probability drift " + std::to_string(worst));
  char buf[120];
  std::snprintf(buf, sizeof buf, "%d walks (nbar <= 8, k <= 6), max |step - direct| %.2e", walks,
                worst);
  if (v.pass) v.detail = buf;
  return v;
}

Verdict solver() {
  Verdict v;
  const SolverOptions options;
  std::string summary;
  auto timed = [&](const std::string& name, const std::function<double()>& run) {
    const auto begin = Clock::now();
    double regret = 0.0;
    try {
      regret = run();
    } catch (const std::exception& error) {
      v.require(false, name + ": " + error.what());
      return;
    }
    const double elapsed = seconds_since(begin);
    v.require(elapsed < 30.0, name + " took " + std::to_string(elapsed) + " s");
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s%s regret %.1e %.2fs", summary.empty() ? "" : "; ",
                  name.c_str(), regret, elapsed);
    summary += buf;
  };

  timed("pennies", [&] {
    const auto game = matching_pennies();
    const auto result = trace_path(game, make_start(game, std::nullopt, options), options);
    for (const auto& s : result.profile.strategies) {
      v.require(std::abs(s[0] - 0.5) <= 1e-4 && std::abs(s[1] - 0.5) <= 1e-4,
                "matching pennies is not at (0.5, 0.5)");
    }
    return oracle::verify_nash(game, result.profile).max_regret;
  });
  timed("rps", [&] {
    const auto game = rock_paper_scissors(3);
    const auto result =
        trace_path_symmetric(game, make_start_symmetric(game, std::nullopt, options), options);
    for (double p : result.strategy) {
      v.require(std::abs(p - 1.0 / 3) <= 1e-4, "shared RPS is not uniform");
    }
    return oracle::verify_nash(game, result.profile(game)).max_regret;
  });
  timed("coordination", [&] {
    const auto game = coordination_2x2();
    const auto result = trace_path(game, make_start(game, std::nullopt, options), options);
    for (const auto& s : result.profile.strategies) {
      v.require(std::count(s.begin(), s.end(), 1.0) == 1, "coordination result is not pure");
    }
    const double regret = oracle::verify_nash(game, result.profile).max_regret;
    v.require(regret == 0.0, "coordination regret is not zero");
    return regret;
  });
  timed("ice-cream", [&] {
    const auto game = generate_ice_cream({3, 4, 2});
    const auto result = trace_path(game, make_start(game, std::nullopt, options), options);
    const double regret = oracle::verify_nash(game, result.profile).max_regret;
    v.require(regret <= 1e-6, "ice-cream regret above 1e-6");
    return regret;
  });
  timed("shared ice-cream", [&] {
    const auto game = generate_ice_cream({4, 2, 0, true});
    const auto result =
        trace_path_symmetric(game, make_start_symmetric(game, std::nullopt, options), options);
    const double regret = oracle::verify_nash(game, result.profile(game)).max_regret;
    v.require(regret <= 1e-6, "shared ice-cream regret above 1e-6");
    return regret;
  });
  if (v.pass) v.detail = summary;
  return v;
}

Verdict shift_and_swap() {
  Verdict v;
  std::mt19937_64 rng(1007);
  double worst_shift = 0.0;
  for (std::uint64_t g = 0; g < 10; ++g) {
    const int n = 3 + static_cast<int>(g % 4);
    const auto game = generate_random({n, 6, 3, 300 + g, true, UtilityKind::linear});
    const auto& f = std::get<LinearUtility>(game.utility()).coefficients;
    for (int s = 0; s < game.num_actions(); ++s) {
      const auto& view = game.view(s);
      const int nodes = view.node_count();
      Distribution d{std::vector<int>(nodes, 0)};
      for (int a = 0; a < n; ++a) ++d.counts[rng() % nodes];
      auto direct = [&] {
        double u = 0.0;
        for (std::size_t p = 0; p < view.kept.size(); ++p) u += f[s][p][d.counts[p]];
        return u;
      };
      double u = direct();
      for (int step = 0; step < 100; ++step) {
        int from;
        do {
          from = static_cast<int>(rng() % nodes);
        } while (d.counts[from] == 0);
        const int to = static_cast<int>(rng() % nodes);
        u = linear_utility_shift(game, s, u, d, from, to);
        --d.counts[from];
        ++d.counts[to];
        worst_shift = std::max(worst_shift, std::abs(u - direct()));
      }
    }
  }

  double worst_swap = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int agents = 3 + trial % 5;
    const int nodes = 2 + trial % 4;
    std::vector<std::vector<double>> sigma(agents);
    for (auto& s : sigma) s = test::random_simplex(nodes, rng);
    std::vector<int> pick(agents);
    for (auto& p : pick) p = static_cast<int>(rng() % nodes);
    auto direct = [&] {
      double p = 1.0;
      for (int j = 0; j < agents; ++j) p *= sigma[j][pick[j]];
      return p;
    };
    double prob = direct();
    for (int step = 0; step < 100; ++step) {
      const int a = static_cast<int>(rng() % agents);
      int b;
      do {
        b = static_cast<int>(rng() % agents);
      } while (b == a);
      prob = *swap_probability(prob, sigma[a], sigma[b], pick[a], pick[b]);
      std::swap(pick[a], pick[b]);
      const double exact = direct();
      worst_swap = std::max(worst_swap, std::abs(prob - exact) / exact);
    }
  }
  v.require(worst_shift <= 1e-12, "linear shift drift " + std::to_string(worst_shift));
  v.require(worst_swap <= 1e-12, "swap drift " + std::to_string(worst_swap));
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "100-step walks: max shift |diff| %.2e, max swap relative diff %.2e", worst_shift,
                worst_swap);
  if (v.pass) v.detail = buf;
  return v;
}

Verdict retraction_and_homotopy() {
  Verdict v;
  std::mt19937_64 rng(1008);
  const std::vector<int> blocks{2, 3, 5};
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::VectorXd w(10);
    for (int k = 0; k < 10; ++k) w[k] = 3.0 * (2.0 * test::unit(rng) - 1.0);
    const Eigen::VectorXd once = retract(w, blocks);
    v.require(retract(once, blocks) == once, "retraction is not idempotent");
  }

  double worst_start = 0.0;
  double worst_grad = 0.0;
  std::vector<ActionGraphGame> games{matching_pennies(), coordination_2x2(),
                                     rock_paper_scissors(3), generate_ice_cream({3, 4, 2})};
  for (std::uint64_t g = 0; g < 8; ++g) games.push_back(random_game(rng, 400 + g, g % 2 == 0));
  for (const auto& game : games) {
    const auto start = make_start(game, std::nullopt);
    worst_start = std::max(
        worst_start,
        residual_F(game, start.point.w, 1.0, start.bonus_vector).cwiseAbs().maxCoeff());
    if (game.has_shared_action_sets()) {
      const auto sym = make_start_symmetric(game, std::nullopt);
      const SymmetricHomotopy homotopy(game);
      worst_start = std::max(
          worst_start,
          homotopy.residual(sym.point.w, 1.0, sym.bonus_vector).cwiseAbs().maxCoeff());
    }
    const int m = game.dimension();
    for (int trial = 0; trial < 3; ++trial) {
      Eigen::VectorXd w(m);
      for (int k = 0; k < m; ++k) w[k] = 2.0 * test::unit(rng) - 1.0;
      const double lambda = test::unit(rng);
      const Eigen::MatrixXd G = grad_F(game, w, lambda, start.bonus_vector);
      const double h = 1e-6;
      for (int k = 0; k < m; ++k) {
        Eigen::VectorXd plus = w, minus = w;
        plus[k] += h;
        minus[k] -= h;
        const Eigen::VectorXd fd = (residual_F(game, plus, lambda, start.bonus_vector) -
                                    residual_F(game, minus, lambda, start.bonus_vector)) /
                                   (2 * h);
        worst_grad = std::max(worst_grad, (fd - G.col(k)).cwiseAbs().maxCoeff());
      }
    }
  }
  v.require(worst_start <= 1e-9, "start residual " + std::to_string(worst_start));
  v.require(worst_grad <= 1e-5, "grad_F deviation " + std::to_string(worst_grad));
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "R idempotent on 1000 vectors; max start residual %.2e; max |grad_F - fd| %.2e",
                worst_start, worst_grad);
  if (v.pass) v.detail = buf;
  return v;
}

}  // namespace

int main() {
  const std::pair<const char*, Verdict (*)()> criteria[] = {
      {"jacobian method equivalence", method_equivalence},
      {"symmetric equivalence", symmetric_equivalence},
      {"gradient check", gradient_check},
      {"evaluation counters", counters},
      {"composition walk", gray_walk},
      {"solver correctness", solver},
      {"linear shift and swap", shift_and_swap},
      {"retraction and homotopy", retraction_and_homotopy},
  };
  int failures = 0;
  int index = 1;
  for (const auto& [name, check] : criteria) {
    Verdict verdict;
    try {
      verdict = check();
    } catch (const std::exception& error) {
      verdict = {false, std::string("exception: ") + error.what()};
    }
    std::printf("%s criterion %d (%s): %s\n", verdict.pass ? "PASS" : "FAIL", index, name,
                verdict.detail.c_str());
    std::fflush(stdout);
    if (!verdict.pass) ++failures;
    ++index;
  }
  return failures == 0 ? 0 : 1;
}
