#include "agg/generators.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>

namespace agg {

namespace {

std::vector<std::vector<int>> clusters(const std::vector<int>& sizes,
                                       std::vector<std::string>& names) {
  std::vector<std::vector<int>> sets(sizes.size());
  int next = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    for (int k = 0; k < sizes[i]; ++k) {
      names.push_back("p" + std::to_string(i) + ":" + std::to_string(k));
      sets[i].push_back(next++);
    }
  }
  return sets;
}

// Row-major local profiles over `radices`, slowest first.
template <class Fn>
void for_each_index(const std::vector<int>& radices, Fn&& fn) {
  std::vector<int> digits(radices.size(), 0);
  std::size_t position = 0;
  while (true) {
    fn(digits, position++);
    int j = static_cast<int>(digits.size()) - 1;
    while (j >= 0 && ++digits[j] == radices[j]) digits[j--] = 0;
    if (j < 0) return;
  }
}

double unit_real(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

}  // namespace

ActionGraphGame encode_normal_form(const NormalFormGame& nfg) {
  const int n = nfg.num_agents();
  if (n < 1) throw GameError("a normal-form game needs at least one agent");
  for (int s : nfg.shape) {
    if (s < 1) throw GameError("every agent needs at least one action");
  }
  if (static_cast<int>(nfg.payoffs.size()) != n) {
    throw GameError("expected one payoff tensor per agent");
  }
  for (int i = 0; i < n; ++i) {
    if (nfg.payoffs[i].size() != nfg.profile_count()) {
      throw GameError("payoff tensor of agent " + std::to_string(i) + " has " +
                      std::to_string(nfg.payoffs[i].size()) + " entries, expected " +
                      std::to_string(nfg.profile_count()));
    }
  }
  GraphicalGame graphical;
  graphical.num_actions = nfg.shape;
  for (int i = 0; i < n; ++i) {
    std::vector<int> parents;
    for (int j = 0; j < n; ++j) {
      if (j != i) parents.push_back(j);
    }
    // Reorder the tensor so the own action is the slowest index.
    std::vector<int> radices{nfg.shape[i]};
    for (int j : parents) radices.push_back(nfg.shape[j]);
    std::vector<double> table(nfg.profile_count());
    std::vector<int> full(n);
    for_each_index(radices, [&](const std::vector<int>& digits, std::size_t position) {
      full[i] = digits[0];
      for (std::size_t p = 0; p < parents.size(); ++p) full[parents[p]] = digits[p + 1];
      table[position] = nfg.payoffs[i][nfg.index(full)];
    });
    graphical.parents.push_back(std::move(parents));
    graphical.tables.push_back(std::move(table));
  }
  return encode_graphical_game(graphical);
}

ActionGraphGame encode_graphical_game(const GraphicalGame& game) {
  const int n = static_cast<int>(game.num_actions.size());
  if (n < 1) throw GameError("a graphical game needs at least one agent");
  if (static_cast<int>(game.parents.size()) != n || static_cast<int>(game.tables.size()) != n) {
    throw GameError("graphical game needs parents and a table for every agent");
  }
  for (int i = 0; i < n; ++i) {
    if (game.num_actions[i] < 1) throw GameError("every agent needs at least one action");
    std::vector<int> seen = game.parents[i];
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
      throw GameError("agent " + std::to_string(i) + " lists a parent twice");
    }
    for (int j : game.parents[i]) {
      if (j < 0 || j >= n || j == i) {
        throw GameError("agent " + std::to_string(i) + " has an invalid parent " +
                        std::to_string(j));
      }
    }
  }

  std::vector<std::string> names;
  const auto sets = clusters(game.num_actions, names);
  std::vector<std::vector<int>> neighbors(names.size());
  TableUtility table;
  table.entries.resize(names.size());

  for (int i = 0; i < n; ++i) {
    std::vector<int> radices{game.num_actions[i]};
    std::vector<int> family_nodes;
    std::vector<int> first_position;  // of each parent's cluster within the neighbor list
    for (int j : game.parents[i]) {
      radices.push_back(game.num_actions[j]);
      first_position.push_back(static_cast<int>(family_nodes.size()));
      family_nodes.insert(family_nodes.end(), sets[j].begin(), sets[j].end());
    }
    const std::size_t expected =
        std::accumulate(radices.begin(), radices.end(), std::size_t{1}, std::multiplies<>());
    if (game.tables[i].size() != expected) {
      throw GameError("local table of agent " + std::to_string(i) + " has " +
                      std::to_string(game.tables[i].size()) + " entries, expected " +
                      std::to_string(expected));
    }
    for (int node : sets[i]) neighbors[node] = family_nodes;
    for_each_index(radices, [&](const std::vector<int>& digits, std::size_t position) {
      std::vector<int> counts(family_nodes.size(), 0);
      for (std::size_t p = 0; p < first_position.size(); ++p) {
        ++counts[first_position[p] + digits[p + 1]];
      }
      table.entries[sets[i][digits[0]]][counts] = game.tables[i][position];
    });
  }
  return ActionGraphGame(n, std::move(names), sets, std::move(neighbors), std::move(table));
}

ActionGraphGame generate_ice_cream(const IceCreamOptions& options) {
  const int n = options.agents;
  const int L = options.locations;
  if (n < 1) throw GameError("ice-cream game needs at least one vendor");
  if (L < 1) throw GameError("ice-cream game needs at least one location");
  if (!options.shared && (options.chocolate < 1 || options.chocolate >= n)) {
    throw GameError(
        "without shared actions the chocolate count must leave at least one vendor of each "
        "flavor");
  }
  std::vector<std::string> names;
  for (int l = 0; l < L; ++l) names.push_back("choc@" + std::to_string(l));
  for (int l = 0; l < L; ++l) names.push_back("van@" + std::to_string(l));
  auto node = [L](int flavor, int location) { return flavor * L + location; };

  std::vector<std::vector<int>> neighbors(2 * L);
  LinearUtility utility;
  utility.coefficients.resize(2 * L);
  for (int flavor = 0; flavor < 2; ++flavor) {
    for (int l = 0; l < L; ++l) {
      const int s = node(flavor, l);
      for (int near = std::max(0, l - 1); near <= std::min(L - 1, l + 1); ++near) {
        for (int other = 0; other < 2; ++other) {
          const int a = node(other, near);
          neighbors[s].push_back(a);
          std::vector<double> f(n + 1);
          for (int k = 0; k <= n; ++k) {
            if (other != flavor) {
              f[k] = options.vanilla_weight * k;
            } else {
              f[k] = -options.chocolate_weight * (a == s ? k - 1 : k);
            }
          }
          utility.coefficients[s].push_back(std::move(f));
        }
      }
    }
  }

  std::vector<int> all(2 * L), chocolate(L), vanilla(L);
  std::iota(all.begin(), all.end(), 0);
  std::iota(chocolate.begin(), chocolate.end(), 0);
  std::iota(vanilla.begin(), vanilla.end(), L);
  std::vector<std::vector<int>> sets;
  for (int i = 0; i < n; ++i) {
    sets.push_back(options.shared ? all : (i < options.chocolate ? chocolate : vanilla));
  }
  return ActionGraphGame(n, std::move(names), std::move(sets), std::move(neighbors),
                         std::move(utility));
}

ActionGraphGame generate_random(const RandomGameOptions& options) {
  const int n = options.agents;
  const int k = options.actions;
  if (n < 1 || k < 1) throw GameError("random games need at least one agent and one action");
  if (options.max_in_degree < 0) throw GameError("max in-degree must be non-negative");
  std::mt19937_64 rng(options.seed);

  std::vector<std::string> names;
  for (int s = 0; s < k; ++s) names.push_back("a" + std::to_string(s));

  std::vector<std::vector<int>> sets(n);
  if (options.shared) {
    for (auto& set : sets) {
      set.resize(k);
      std::iota(set.begin(), set.end(), 0);
    }
  } else {
    // Every action gets an owner and every agent an action; the rest is random.
    std::vector<std::vector<char>> member(n, std::vector<char>(k, 0));
    for (int s = 0; s < std::max(n, k); ++s) member[s % n][s % k] = 1;
    for (int i = 0; i < n; ++i) {
      for (int s = 0; s < k; ++s) {
        if (unit_real(rng) < 0.3) member[i][s] = 1;
      }
      for (int s = 0; s < k; ++s) {
        if (member[i][s]) sets[i].push_back(s);
      }
    }
  }

  std::vector<std::vector<int>> neighbors(k);
  const int top = std::min(options.max_in_degree, k);
  for (int s = 0; s < k; ++s) {
    const int degree = uniform_int(rng, 0, top);
    std::vector<int> pool(k);
    std::iota(pool.begin(), pool.end(), 0);
    for (int d = 0; d < degree; ++d) {
      const int pick = uniform_int(rng, d, k - 1);
      std::swap(pool[d], pool[pick]);
    }
    neighbors[s].assign(pool.begin(), pool.begin() + degree);
    std::sort(neighbors[s].begin(), neighbors[s].end());
  }

  auto value = [&] { return 2.0 * unit_real(rng) - 1.0; };
  if (options.kind == UtilityKind::linear) {
    LinearUtility utility;
    utility.coefficients.resize(k);
    for (int s = 0; s < k; ++s) {
      for (std::size_t p = 0; p < neighbors[s].size(); ++p) {
        std::vector<double> f(n + 1);
        for (double& x : f) x = value();
        utility.coefficients[s].push_back(std::move(f));
      }
    }
    return ActionGraphGame(n, std::move(names), std::move(sets), std::move(neighbors),
                           std::move(utility));
  }
  TableUtility utility;
  utility.entries.resize(k);
  for (int s = 0; s < k; ++s) {
    for (auto& counts : reachable_neighbor_counts(n, sets, neighbors, s)) {
      utility.entries[s].emplace(std::move(counts), value());
    }
  }
  return ActionGraphGame(n, std::move(names), std::move(sets), std::move(neighbors),
                         std::move(utility));
}

ActionGraphGame matching_pennies() {
  NormalFormGame nfg;
  nfg.shape = {2, 2};
  nfg.payoffs = {{1, -1, -1, 1}, {-1, 1, 1, -1}};
  return encode_normal_form(nfg);
}

ActionGraphGame coordination_2x2() {
  NormalFormGame nfg;
  nfg.shape = {2, 2};
  nfg.payoffs = {{2, 0, 0, 1}, {2, 0, 0, 1}};
  return encode_normal_form(nfg);
}

namespace {

ActionGraphGame shared_table_game(int agents, std::vector<std::string> names,
                                  const std::function<double(int, const std::vector<int>&)>& u) {
  const int k = static_cast<int>(names.size());
  std::vector<int> all(k);
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::vector<int>> sets(agents, all);
  std::vector<std::vector<int>> neighbors(k, all);
  TableUtility table;
  table.entries.resize(k);
  for (int s = 0; s < k; ++s) {
    for (auto& counts : reachable_neighbor_counts(agents, sets, neighbors, s)) {
      const double v = u(s, counts);
      table.entries[s].emplace(std::move(counts), v);
    }
  }
  return ActionGraphGame(agents, std::move(names), std::move(sets), std::move(neighbors),
                         std::move(table));
}

}  // namespace

ActionGraphGame rock_paper_scissors(int agents) {
  if (agents < 1) throw GameError("rock-paper-scissors needs at least one agent");
  // Index order R, P, S: action s beats (s + 2) % 3 and loses to (s + 1) % 3.
  return shared_table_game(agents, {"R", "P", "S"}, [](int s, const std::vector<int>& d) {
    return static_cast<double>(d[(s + 2) % 3] - d[(s + 1) % 3]);
  });
}

ActionGraphGame shared_coordination(int agents, int actions) {
  if (agents < 1 || actions < 1) {
    throw GameError("shared coordination needs at least one agent and one action");
  }
  std::vector<std::string> names;
  for (int s = 0; s < actions; ++s) names.push_back("c" + std::to_string(s));
  return shared_table_game(agents, std::move(names), [](int s, const std::vector<int>& d) {
    const int own = d[s] - 1;
    for (std::size_t t = 0; t < d.size(); ++t) {
      if (static_cast<int>(t) != s && d[t] > own) return 0.0;
    }
    return 1.0;
  });
}

}  // namespace agg
