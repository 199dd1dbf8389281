#include "agg/oracle.hpp"

#include <algorithm>
#include <variant>

namespace agg {

std::size_t NormalFormGame::profile_count() const {
  std::size_t count = 1;
  for (int s : shape) count *= static_cast<std::size_t>(s);
  return count;
}

std::size_t NormalFormGame::index(const std::vector<int>& local_profile) const {
  std::size_t position = 0;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    position = position * static_cast<std::size_t>(shape[i]) + local_profile[i];
  }
  return position;
}

namespace oracle {
namespace {

void require_cap(const ActionGraphGame& game, std::uint64_t cap) {
  long double total = 1;
  for (const auto& set : game.action_sets()) total *= static_cast<long double>(set.size());
  if (total > static_cast<long double>(cap)) {
    throw CapExceeded("normal-form expansion needs " + std::to_string(static_cast<double>(total)) +
                      " profiles, above the cap of " + std::to_string(cap));
  }
}

// Calls fn(local profile, full counts) for every pure profile in row-major
// order.
template <class Fn>
void for_each_profile(const ActionGraphGame& game, Fn&& fn) {
  const int n = game.num_agents();
  std::vector<int> local(n, 0);
  std::vector<int> counts(game.num_actions(), 0);
  while (true) {
    std::fill(counts.begin(), counts.end(), 0);
    for (int i = 0; i < n; ++i) ++counts[game.action_set(i)[local[i]]];
    fn(local, counts);
    int j = n - 1;
    while (j >= 0 && ++local[j] == static_cast<int>(game.action_set(j).size())) local[j--] = 0;
    if (j < 0) return;
  }
}

}  // namespace

double utility(const ActionGraphGame& game, int action, const std::vector<int>& full_counts) {
  const auto& nbrs = game.neighbors(action);
  std::vector<int> key;
  key.reserve(nbrs.size());
  for (int a : nbrs) key.push_back(full_counts[a]);
  if (const auto* table = std::get_if<TableUtility>(&game.utility())) {
    const auto& entries = table->entries[action];
    const auto it = entries.find(key);
    if (it == entries.end()) throw GameError("oracle: missing utility entry");
    return it->second;
  }
  const auto& f = std::get<LinearUtility>(game.utility()).coefficients[action];
  double total = 0.0;
  for (std::size_t p = 0; p < key.size(); ++p) total += f[p][key[p]];
  return total;
}

NormalFormGame expand_normal_form(const ActionGraphGame& game, std::uint64_t cap) {
  game.require_valid();
  require_cap(game, cap);
  NormalFormGame nfg;
  for (const auto& set : game.action_sets()) nfg.shape.push_back(static_cast<int>(set.size()));
  nfg.payoffs.assign(game.num_agents(), {});
  for (auto& tensor : nfg.payoffs) tensor.reserve(nfg.profile_count());
  for_each_profile(game, [&](const std::vector<int>& local, const std::vector<int>& counts) {
    for (int i = 0; i < game.num_agents(); ++i) {
      nfg.payoffs[i].push_back(utility(game, game.action_set(i)[local[i]], counts));
    }
  });
  return nfg;
}

std::vector<std::vector<double>> expected_payoffs(const ActionGraphGame& game,
                                                  const MixedProfile& profile,
                                                  std::uint64_t cap) {
  const NormalFormGame nfg = expand_normal_form(game, cap);
  const int n = game.num_agents();
  std::vector<std::vector<double>> values(n);
  for (int i = 0; i < n; ++i) values[i].assign(nfg.shape[i], 0.0);
  std::size_t position = 0;
  for_each_profile(game, [&](const std::vector<int>& local, const std::vector<int>&) {
    for (int i = 0; i < n; ++i) {
      double weight = 1.0;
      for (int j = 0; j < n; ++j) {
        if (j != i) weight *= profile.strategies[j][local[j]];
      }
      values[i][local[i]] += nfg.payoffs[i][position] * weight;
    }
    ++position;
  });
  return values;
}

PayoffJacobian brute_jacobian(const ActionGraphGame& game, const MixedProfile& profile,
                              std::uint64_t cap) {
  const NormalFormGame nfg = expand_normal_form(game, cap);
  const int n = game.num_agents();
  std::vector<int> offsets(n, 0);
  for (int i = 1; i < n; ++i) offsets[i] = offsets[i - 1] + nfg.shape[i - 1];
  const int m = offsets.empty() ? 0 : offsets.back() + nfg.shape.back();

  PayoffJacobian jacobian;
  jacobian.values = Eigen::MatrixXd::Zero(m, m);
  jacobian.order = game.strategy_order();
  jacobian.method = JacobianMethod::naive;
  jacobian.entry_utility_evals.assign(static_cast<std::size_t>(m) * m, 0);

  // Entry ((i, s_i), (i', s_i')) = sum over profiles with both pinned of
  // u_i(profile) * prod over j != i, i' of sigma_j.
  std::size_t position = 0;
  for_each_profile(game, [&](const std::vector<int>& local, const std::vector<int>&) {
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) {
        if (k == i) continue;
        double weight = 1.0;
        for (int j = 0; j < n; ++j) {
          if (j != i && j != k) weight *= profile.strategies[j][local[j]];
        }
        const int row = offsets[i] + local[i];
        const int col = offsets[k] + local[k];
        jacobian.values(row, col) += nfg.payoffs[i][position] * weight;
        ++jacobian.entry_utility_evals[static_cast<std::size_t>(row) * m + col];
        ++jacobian.counters.utility_evals;
      }
    }
    ++position;
  });
  return jacobian;
}

RegretReport verify_nash(const ActionGraphGame& game, const MixedProfile& profile,
                         std::uint64_t cap) {
  check_profile(game, profile, 1e-9);
  const auto values = expected_payoffs(game, profile, cap);
  RegretReport report;
  for (int i = 0; i < game.num_agents(); ++i) {
    AgentRegret agent;
    agent.best_response_value = *std::max_element(values[i].begin(), values[i].end());
    for (std::size_t k = 0; k < values[i].size(); ++k) {
      agent.current_value += profile.strategies[i][k] * values[i][k];
    }
    agent.regret = std::max(0.0, agent.best_response_value - agent.current_value);
    report.max_regret = std::max(report.max_regret, agent.regret);
    report.agents.push_back(agent);
  }
  return report;
}

}  // namespace oracle
}  // namespace agg
