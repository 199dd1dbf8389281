#include <doctest.h>

#include <algorithm>
#include <random>

#include "agg/game.hpp"
#include "agg/generators.hpp"
#include "agg/oracle.hpp"
#include "agg/payoff.hpp"
#include "support.hpp"

using namespace agg;

namespace {

// Two agents over {x, y}; nu(x) = {x, y}, nu(y) = {}.
ActionGraphGame tiny_table(bool drop_entry) {
  TableUtility table;
  table.entries.resize(2);
  for (int a = 0; a <= 2; ++a) {
    for (int b = 0; a + b <= 2; ++b) {
      if (a + b < 1) continue;  // x itself is always counted
      if (drop_entry && a == 2 && b == 0) continue;
      if (a >= 1) table.entries[0][{a, b}] = a - b;
    }
  }
  table.entries[1][{}] = 0.5;
  return ActionGraphGame(2, {"x", "y"}, {{0, 1}, {0, 1}}, {{0, 1}, {}}, table);
}

}  // namespace

TEST_CASE("validation accepts generated games and reports defects") {
  CHECK(generate_ice_cream({3, 4, 2}).valid());
  CHECK(tiny_table(false).valid());

  const auto broken = tiny_table(true);
  REQUIRE_FALSE(broken.valid());
  const auto& v = broken.validation().violations;
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == "missing_entry");
  CHECK(v[0].action == 0);
  CHECK(v[0].counts == std::vector<int>{2, 0});

  TableUtility table;
  table.entries.resize(1);
  table.entries[0][{}] = 0.0;
  const ActionGraphGame out_of_range(1, {"a"}, {{1}}, {{}}, table);
  CHECK(std::any_of(out_of_range.validation().violations.begin(),
                    out_of_range.validation().violations.end(),
                    [](const Violation& x) { return x.kind == "out_of_range"; }));
  CHECK_THROWS_AS(out_of_range.require_valid(), GameError);
}

TEST_CASE("distribution_of counts choices") {
  TableUtility table;
  table.entries.resize(3);
  for (int s = 0; s < 3; ++s) table.entries[s][{}] = 0.0;
  const ActionGraphGame game(3, {"a", "b", "c"}, {{0, 1, 2}, {0, 1, 2}, {0, 1, 2}},
                             {{}, {}, {}}, table);
  const int profile[] = {0, 0, 1};
  CHECK(distribution_of(game, profile).counts == std::vector<int>{2, 1, 0});
  const int same[] = {2, 2, 2};
  CHECK(distribution_of(game, same).counts == std::vector<int>{0, 0, 3});
  const int bad[] = {0, 0, 5};
  CHECK_THROWS(distribution_of(game, bad));

  // One node per agent action: every count is 0 or 1, one per cluster.
  const auto encoded = encode_normal_form({{3, 3, 3}, std::vector<std::vector<double>>(
                                                          3, std::vector<double>(27, 0.0))});
  const int pick[] = {1, 5, 6};
  const auto d = distribution_of(encoded, pick);
  CHECK(d.total() == 3);
  for (int c : d.counts) CHECK((c == 0 || c == 1));
}

TEST_CASE("projection of distributions and strategies") {
  // S = {a, b, c, s}, nu(s) = {a, s}.
  const auto view = make_view(3, std::vector<int>{0, 3}, 4);
  CHECK(view.node_count() == 3);
  CHECK(project_distribution(view, {{1, 2, 0, 1}}).counts == std::vector<int>{1, 1, 2});

  const auto identity = make_view(0, std::vector<int>{0, 1, 2}, 3);
  CHECK(project_distribution(identity, {{1, 2, 3}}).counts == std::vector<int>{1, 2, 3, 0});

  const auto empty = make_view(0, std::vector<int>{}, 3);
  CHECK(project_distribution(empty, {{1, 2, 3}}).counts == std::vector<int>{6});

  const auto single = make_view(0, std::vector<int>{0}, 4);
  const int all[] = {0, 1, 2, 3};
  const double uniform[] = {0.25, 0.25, 0.25, 0.25};
  CHECK(project_mixed_strategy(single, all, uniform) == std::vector<double>{0.25, 0.75});
  const int inside[] = {0};
  const double one[] = {1.0};
  CHECK(project_mixed_strategy(single, inside, one) == std::vector<double>{1.0, 0.0});
  const int outside[] = {2, 3};
  const double half[] = {0.5, 0.5};
  CHECK(project_mixed_strategy(single, outside, half) == std::vector<double>{0.0, 1.0});
}

TEST_CASE("utility_eval on fixtures") {
  const auto rps = rock_paper_scissors(2);
  // Views of the shared encoding keep R, P, S; the sink is empty.
  CHECK(utility_eval(rps, 0, {{1, 0, 1, 0}}) == 1.0);
  CHECK(utility_eval(rps, 0, {{2, 0, 0, 0}}) == 0.0);
  CHECK(utility_eval(rps, 0, {{1, 1, 0, 0}}) == -1.0);

  LinearUtility linear;
  linear.coefficients = {{{0, 1, 2}, {0, 2, 4}}, {{0, 0, 0}}};
  const ActionGraphGame game(2, {"a", "b"}, {{0, 1}, {0, 1}}, {{0, 1}, {1}}, linear);
  REQUIRE(game.valid());
  CHECK(utility_eval(game, 0, {{2, 0, 0}}) == 2.0);

  // An adjusted agent outside the neighborhood only feeds the sink.
  LinearUtility lonely;
  lonely.coefficients = {{{0, 3, 6}}, {}, {}};
  const ActionGraphGame g2(2, {"s", "t", "u"}, {{0, 1, 2}, {0, 1, 2}}, {{0}, {}, {}}, lonely);
  REQUIRE(g2.valid());
  const double base = utility_eval(g2, 0, {{0, 0}}, ActionPair{0, 2});
  CHECK(base == utility_eval(g2, 0, {{1, 1}}));
  CHECK(base == 3.0);
}

TEST_CASE("normal-form and graphical encodings") {
  std::mt19937_64 rng(3);
  NormalFormGame nfg{{3, 3, 3}, std::vector<std::vector<double>>(3, std::vector<double>(27))};
  for (auto& t : nfg.payoffs) {
    for (auto& x : t) x = test::unit(rng);
  }
  const auto game = encode_normal_form(nfg);
  CHECK(game.num_actions() == 9);
  for (int s = 0; s < 9; ++s) CHECK(game.neighbors(s).size() == 6);
  CHECK(game.valid());

  const auto pennies = matching_pennies();
  CHECK(pennies.num_actions() == 4);
  for (int s = 0; s < 4; ++s) CHECK(pennies.neighbors(s).size() == 2);
  for (int trial = 0; trial < 20; ++trial) {
    const double p = test::unit(rng), q = test::unit(rng);
    const MixedProfile profile{{{p, 1 - p}, {q, 1 - q}}};
    const auto v = expected_payoffs(pennies, profile);
    // Agent 0 gets +1 on a match; agent 1 gets +1 on a mismatch.
    CHECK(v[0] == doctest::Approx(q - (1 - q)).epsilon(1e-12));
    CHECK(v[1] == doctest::Approx(-q + (1 - q)).epsilon(1e-12));
    CHECK(v[2] == doctest::Approx(-p + (1 - p)).epsilon(1e-12));
    CHECK(v[3] == doctest::Approx(p - (1 - p)).epsilon(1e-12));
  }

  const auto solo = encode_normal_form({{3}, {{1.0, 2.0, 3.0}}});
  for (int s = 0; s < 3; ++s) CHECK(solo.neighbors(s).empty());

  CHECK_THROWS_AS(encode_normal_form({{2, 2}, {{1, 2, 3}, {1, 2, 3, 4}}}), GameError);
}

TEST_CASE("graphical encoding follows the agent graph") {
  // Chain 0 - 1 - 2 with two actions each.
  GraphicalGame chain{{2, 2, 2}, {{1}, {0, 2}, {1}}, {}};
  chain.tables = {std::vector<double>(4, 1.0), std::vector<double>(8, 2.0),
                  std::vector<double>(4, 3.0)};
  const auto game = encode_graphical_game(chain);
  REQUIRE(game.valid());
  auto linked = [&](int i, int j) {
    for (int s : game.action_set(i)) {
      for (int a : game.neighbors(s)) {
        const auto& set = game.action_set(j);
        if (std::find(set.begin(), set.end(), a) != set.end()) return true;
      }
    }
    return false;
  };
  CHECK_FALSE(linked(0, 2));
  CHECK_FALSE(linked(2, 0));
  CHECK(linked(0, 1));
  CHECK(linked(1, 2));

  GraphicalGame edgeless{{2, 3}, {{}, {}}, {{1.0, 2.0}, {3.0, 4.0, 5.0}}};
  const auto lonely = encode_graphical_game(edgeless);
  for (int s = 0; s < lonely.num_actions(); ++s) CHECK(lonely.neighbors(s).empty());

  GraphicalGame clique{{2, 2, 2}, {{1, 2}, {0, 2}, {0, 1}},
                       {std::vector<double>(8, 0.0), std::vector<double>(8, 0.0),
                        std::vector<double>(8, 0.0)}};
  const auto full = encode_normal_form(
      {{2, 2, 2}, std::vector<std::vector<double>>(3, std::vector<double>(8, 0.0))});
  CHECK(encode_graphical_game(clique).neighbors() == full.neighbors());

  GraphicalGame wrong{{2, 2}, {{1}, {}}, {std::vector<double>(3), std::vector<double>(2)}};
  CHECK_THROWS_AS(encode_graphical_game(wrong), GameError);
}

TEST_CASE("ice-cream generator") {
  const auto game = generate_ice_cream({3, 4, 2});
  CHECK(game.num_actions() == 8);
  CHECK(game.max_in_degree() == 6);
  for (int l = 0; l < 4; ++l) {
    const std::size_t expected = (l == 0 || l == 3) ? 4 : 6;
    CHECK(game.neighbors(l).size() == expected);
    CHECK(game.neighbors(4 + l).size() == expected);
  }
  CHECK(generate_ice_cream({30, 4, 7}).neighbors() == game.neighbors());

  // The own vendor is excluded from its own count.
  const auto solo = generate_ice_cream({1, 3, 0, true});
  for (int s = 0; s < solo.num_actions(); ++s) {
    std::vector<int> counts(solo.neighbors(s).size(), 0);
    const auto& nbrs = solo.neighbors(s);
    counts[std::find(nbrs.begin(), nbrs.end(), s) - nbrs.begin()] = 1;
    CHECK(solo.utility(s, counts) == 0.0);
  }

  const auto shared = generate_ice_cream({4, 2, 0, true});
  CHECK(shared.has_shared_action_sets());
  CHECK_FALSE(game.has_shared_action_sets());

  // Spot values against the local-effect formula with weights 2 and 3.
  const auto weighted = generate_ice_cream({4, 3, 0, true, 2.0, 3.0});
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> full(6, 0);
    const int own = static_cast<int>(rng() % 6);
    ++full[own];
    for (int k = 0; k < 3; ++k) ++full[rng() % 6];
    const int flavor = own / 3, location = own % 3;
    double expected = 0.0;
    for (int l = std::max(0, location - 1); l <= std::min(2, location + 1); ++l) {
      const int same = full[flavor * 3 + l] - (l == location ? 1 : 0);
      const int other = full[(1 - flavor) * 3 + l];
      expected += 3.0 * other - 2.0 * same;
    }
    CHECK(oracle::utility(weighted, own, full) == doctest::Approx(expected).epsilon(1e-15));
  }
}

TEST_CASE("projection commutes with counting and respects independence") {
  std::mt19937_64 rng(5);
  for (int g = 0; g < 20; ++g) {
    const auto game = generate_random({3, 5, 2, static_cast<std::uint64_t>(g), true});
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<int> pure(3);
      for (auto& a : pure) a = static_cast<int>(rng() % 5);
      const auto full = distribution_of(game, pure);
      CHECK(full.total() == 3);
      for (int s = 0; s < game.num_actions(); ++s) {
        if (full.counts[s] == 0) continue;
        const auto projected = project_distribution(game.view(s), full);
        CHECK(projected.total() == 3);
        // Moving an agent between two non-neighbors leaves the utility alone.
        const auto& view = game.view(s);
        for (int from = 0; from < game.num_actions(); ++from) {
          if (from == s || full.counts[from] == 0 || view.node_of_action[from] != view.sink()) {
            continue;
          }
          for (int to = 0; to < game.num_actions(); ++to) {
            if (to == s || view.node_of_action[to] != view.sink()) continue;
            auto moved = full.counts;
            --moved[from];
            ++moved[to];
            CHECK(oracle::utility(game, s, moved) == oracle::utility(game, s, full.counts));
          }
        }
      }
    }
  }
}
