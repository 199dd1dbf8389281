#pragma once

#include <cstdint>
#include <vector>

#include "agg/game.hpp"
#include "agg/oracle.hpp"

namespace agg {

// One node per (agent, action); every node sees every node of the other
// agents' clusters.
ActionGraphGame encode_normal_form(const NormalFormGame& nfg);

// Agent graph with local payoff tables. tables[i] is indexed row-major by
// agent i's own action (slowest), then each parent's action in parents[i]
// order.
struct GraphicalGame {
  std::vector<int> num_actions;
  std::vector<std::vector<int>> parents;
  std::vector<std::vector<double>> tables;
};

ActionGraphGame encode_graphical_game(const GraphicalGame& game);

struct IceCreamOptions {
  int agents = 3;
  int locations = 4;
  int chocolate = 1;  // vendors restricted to chocolate when not shared
  bool shared = false;
  double chocolate_weight = 1.0;  // w_c
  double vanilla_weight = 1.0;    // w_v
};

// Nodes are choc@0..choc@L-1 followed by van@0..van@L-1. Each node sees both
// flavors at its own and adjacent locations. A vendor gains w_v per vendor of
// the other flavor nearby and loses w_c per other vendor of its own flavor.
ActionGraphGame generate_ice_cream(const IceCreamOptions& options);

enum class UtilityKind { table, linear };

struct RandomGameOptions {
  int agents = 3;
  int actions = 5;
  int max_in_degree = 2;
  std::uint64_t seed = 0;
  bool shared = false;
  UtilityKind kind = UtilityKind::table;
};

// Deterministic in the options: equal options give identical games.
ActionGraphGame generate_random(const RandomGameOptions& options);

// Small fixtures.
ActionGraphGame matching_pennies();
// Shared actions R, P, S for n agents; payoff = #beaten - #beating among
// the other agents.
ActionGraphGame rock_paper_scissors(int agents = 2);
// Two agents; matching on A pays 2, on B pays 1, mismatching 0.
ActionGraphGame coordination_2x2();
// Shared actions; pays 1 when no other action is played by more of the
// other agents than one's own.
ActionGraphGame shared_coordination(int agents, int actions);

}  // namespace agg
