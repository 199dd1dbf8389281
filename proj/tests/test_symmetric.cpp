#include <doctest.h>

#include <random>
#include <set>

#include "agg/generators.hpp"
#include "agg/oracle.hpp"
#include "agg/payoff.hpp"
#include "agg/symmetric.hpp"
#include "support.hpp"

using namespace agg;

namespace {

std::vector<std::vector<int>> walk_nodes(int total, int parts) {
  CompositionWalk walk(total, parts);
  std::vector<std::vector<int>> nodes{walk.current()};
  while (walk.next()) nodes.push_back(walk.current());
  return nodes;
}

}  // namespace

TEST_CASE("composition walk examples") {
  CHECK(walk_nodes(2, 2) == std::vector<std::vector<int>>{{2, 0}, {1, 1}, {0, 2}});
  const auto unit = walk_nodes(1, 4);
  CHECK(unit.size() == 4);
  for (const auto& node : unit) CHECK(std::count(node.begin(), node.end(), 1) == 1);
  const auto nodes = walk_nodes(3, 3);
  CHECK(nodes.size() == 10);
  CHECK(std::set<std::vector<int>>(nodes.begin(), nodes.end()).size() == 10);
  CHECK(walk_nodes(5, 1).size() == 1);
  CHECK(CompositionWalk(6, 4).length() == 84);
}

TEST_CASE("class sizes") {
  const int a[] = {2, 1};
  CHECK(class_size(a) == 3);
  const int b[] = {0, 5, 0};
  CHECK(class_size(b) == 1);
  boost::multiprecision::cpp_int total = 0;
  for (const auto& d : walk_nodes(4, 3)) total += class_size(d);
  CHECK(total == 81);
  // 60! / (20!)^3 does not fit in 64 bits.
  const int big[] = {20, 20, 20};
  CHECK(class_size(big) > boost::multiprecision::cpp_int(1) << 80);
}

TEST_CASE("symmetric probabilities") {
  const double half[] = {0.5, 0.5};
  const double skew[] = {0.2, 0.8};
  const int one_one[] = {1, 1};
  const int two_zero[] = {2, 0};
  const int zero_two[] = {0, 2};
  CHECK(symmetric_profile_prob(half, one_one) == 0.25);
  CHECK(symmetric_profile_prob(skew, two_zero) == doctest::Approx(0.04).epsilon(1e-15));
  const double pure[] = {0.0, 1.0};
  CHECK(symmetric_profile_prob(pure, two_zero) == 0.0);
  CHECK(symmetric_distribution_prob(half, one_one) == 0.5);
  CHECK(symmetric_distribution_prob(pure, zero_two) == 1.0);

  const double stepped = *distribution_prob_step(0.25, half, two_zero, {0, 1});
  CHECK(stepped == 0.5);
  CHECK(*distribution_prob_step(stepped, half, one_one, {1, 0}) == 0.25);
  CHECK_FALSE(distribution_prob_step(0.0, pure, two_zero, {0, 1}).has_value());

  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const int parts = 1 + static_cast<int>(rng() % 5);
    const int total = static_cast<int>(rng() % 9);
    const auto sigma = test::random_simplex(parts, rng);
    double sum = 0.0;
    for (const auto& d : walk_nodes(total, parts)) sum += symmetric_distribution_prob(sigma, d);
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("stepwise probabilities along a full walk") {
  std::mt19937_64 rng(6);
  const auto sigma = test::random_simplex(4, rng);
  CompositionWalk walk(6, 4);
  double p = symmetric_distribution_prob(sigma, walk.current());
  while (true) {
    const auto before = walk.current();
    const auto move = walk.next();
    if (!move) break;
    p = *distribution_prob_step(p, sigma, before, *move);
    CHECK(std::abs(p - symmetric_distribution_prob(sigma, walk.current())) <= 1e-12);
  }
}

TEST_CASE("symmetric Jacobian") {
  const auto rps = rock_paper_scissors(2);
  const auto J = jacobian_symmetric(rps, std::vector<double>(3, 1.0 / 3));
  CHECK(J.values(0, 2) == 1.0);
  CHECK(J.values(0, 1) == -1.0);

  const auto ice = generate_ice_cream({3, 3, 0, true});
  std::mt19937_64 rng(9);
  const auto sigma = test::random_simplex(6, rng);
  const auto S = jacobian_symmetric(ice, sigma);
  const auto naive = jacobian_naive(ice, test::replicate(ice, sigma));
  // Every ordered agent pair sees the same block.
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) {
      if (i == k) continue;
      CHECK(test::max_abs_diff(naive.values.block(ice.offset(i), ice.offset(k), 6, 6),
                               S.values) <= 1e-10);
    }
  }

  // One evaluation per projected distribution and column.
  for (int s = 0; s < ice.num_actions(); ++s) {
    const int k = static_cast<int>(ice.neighbors(s).size()) +
                  (ice.neighbors(s).size() < 6 ? 1 : 0);
    CHECK(S.row_entry_evals[s] == count_projected_distributions(1, k));
  }

  CHECK_THROWS_AS(jacobian_symmetric(generate_ice_cream({3, 3, 1}), sigma), GameError);
}

TEST_CASE("symmetric expected payoffs match the engine") {
  const auto game = generate_random({4, 5, 2, 3, true, UtilityKind::linear});
  std::mt19937_64 rng(10);
  const auto sigma = test::random_simplex(5, rng);
  const auto sym = expected_payoffs_symmetric(game, sigma);
  const auto full = expected_payoffs(game, test::replicate(game, sigma));
  CHECK((sym - full.head(5)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(std::abs(symmetric_regret(game, sigma).max_regret -
                 oracle::verify_nash(game, test::replicate(game, sigma)).max_regret) <= 1e-12);
}
