#include "agg/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace agg::io {

namespace {

const Json& require(const Json& document, const char* key) {
  if (!document.is_object() || !document.contains(key)) {
    throw FormatError(std::string("missing key '") + key + "'");
  }
  return document.at(key);
}

void check_version(const Json& document) {
  const Json& version = require(document, "version");
  if (!version.is_number_integer() || version.get<int>() != 1) {
    throw FormatError("unsupported version " + version.dump() + ", expected 1");
  }
}

int to_index(const std::string& key, const char* what) {
  std::size_t used = 0;
  int value = -1;
  try {
    value = std::stoi(key, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != key.size() || key.empty()) {
    throw FormatError(std::string(what) + " key '" + key + "' is not an index");
  }
  return value;
}

template <class T>
T as(const Json& value, const char* what) {
  try {
    return value.get<T>();
  } catch (const nlohmann::json::exception& error) {
    throw FormatError(std::string(what) + ": " + error.what());
  }
}

// Wraps json library errors raised while walking a document.
template <class Fn>
auto guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& error) {
    throw FormatError(error.what());
  }
}

}  // namespace

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& error) {
    throw FormatError("'" + path + "' is not valid JSON: " + error.what());
  }
}

void write_json_file(const std::string& path, const Json& document) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write '" + path + "'");
  out << document.dump(2) << '\n';
  if (!out) throw FormatError("failed writing '" + path + "'");
}

ActionGraphGame game_from_json(const Json& document) {
  return guarded([&] {
    check_version(document);
    const int n = as<int>(require(document, "num_agents"), "num_agents");
    auto actions = as<std::vector<std::string>>(require(document, "actions"), "actions");
    auto sets = as<std::vector<std::vector<int>>>(require(document, "action_sets"), "action_sets");
    auto neighbors =
        as<std::vector<std::vector<int>>>(require(document, "neighbors"), "neighbors");
    const Json& utility = require(document, "utility");
    const auto kind = as<std::string>(require(utility, "kind"), "utility kind");
    const Json& payload = require(utility, "payload");
    if (!payload.is_object()) throw FormatError("utility payload must be an object");
    const int num_actions = static_cast<int>(actions.size());

    auto action_of = [&](const std::string& key) {
      const int s = to_index(key, "utility payload");
      if (s < 0 || s >= num_actions) {
        throw FormatError("utility payload names action " + key + " but there are " +
                          std::to_string(num_actions) + " actions");
      }
      return s;
    };

    if (kind == "table") {
      TableUtility table;
      table.entries.resize(num_actions);
      for (const auto& [key, rows] : payload.items()) {
        const int s = action_of(key);
        if (!rows.is_array()) throw FormatError("table rows of action " + key + " must be a list");
        for (const Json& row : rows) {
          auto counts = as<std::vector<int>>(require(row, "counts"), "counts");
          const double value = as<double>(require(row, "value"), "value");
          if (!table.entries[s].emplace(std::move(counts), value).second) {
            throw FormatError("action " + key + " lists the same counts twice");
          }
        }
      }
      return ActionGraphGame(n, std::move(actions), std::move(sets), std::move(neighbors),
                             std::move(table));
    }
    if (kind == "linear") {
      LinearUtility linear;
      linear.coefficients.resize(num_actions);
      for (int s = 0; s < num_actions && s < static_cast<int>(neighbors.size()); ++s) {
        linear.coefficients[s].resize(neighbors[s].size());
      }
      for (const auto& [key, terms] : payload.items()) {
        const int s = action_of(key);
        if (s >= static_cast<int>(neighbors.size())) continue;  // reported by validation
        if (!terms.is_object()) throw FormatError("linear terms of action " + key + " must be an object");
        for (const auto& [neighbor_key, values] : terms.items()) {
          const int a = to_index(neighbor_key, "linear term");
          const auto& nbrs = neighbors[s];
          const auto it = std::find(nbrs.begin(), nbrs.end(), a);
          if (it == nbrs.end()) {
            throw FormatError("linear term of action " + key + " names " + neighbor_key +
                              ", which is not one of its neighbors");
          }
          linear.coefficients[s][it - nbrs.begin()] = as<std::vector<double>>(values, "f values");
        }
      }
      return ActionGraphGame(n, std::move(actions), std::move(sets), std::move(neighbors),
                             std::move(linear));
    }
    throw FormatError("unknown utility kind '" + kind + "'");
  });
}

Json game_to_json(const ActionGraphGame& game) {
  Json document;
  document["version"] = 1;
  document["num_agents"] = game.num_agents();
  document["actions"] = game.actions();
  document["action_sets"] = game.action_sets();
  document["neighbors"] = game.neighbors();
  Json payload = Json::object();
  if (const auto* table = std::get_if<TableUtility>(&game.utility())) {
    for (std::size_t s = 0; s < table->entries.size(); ++s) {
      Json rows = Json::array();
      for (const auto& [counts, value] : table->entries[s]) {
        rows.push_back({{"counts", counts}, {"value", value}});
      }
      payload[std::to_string(s)] = std::move(rows);
    }
    document["utility"] = {{"kind", "table"}, {"payload", std::move(payload)}};
  } else {
    const auto& linear = std::get<LinearUtility>(game.utility());
    for (std::size_t s = 0; s < linear.coefficients.size(); ++s) {
      Json terms = Json::object();
      for (std::size_t p = 0; p < linear.coefficients[s].size(); ++p) {
        terms[std::to_string(game.neighbors(static_cast<int>(s))[p])] = linear.coefficients[s][p];
      }
      payload[std::to_string(s)] = std::move(terms);
    }
    document["utility"] = {{"kind", "linear"}, {"payload", std::move(payload)}};
  }
  return document;
}

ActionGraphGame load_game(const std::string& path) { return game_from_json(read_json_file(path)); }

MixedProfile strategy_from_json(const Json& document) {
  return guarded([&] {
    check_version(document);
    MixedProfile profile;
    profile.strategies =
        as<std::vector<std::vector<double>>>(require(document, "strategies"), "strategies");
    return profile;
  });
}

Json strategy_to_json(const MixedProfile& profile) {
  Json document;
  document["version"] = 1;
  document["strategies"] = profile.strategies;
  return document;
}

MixedProfile load_strategy(const std::string& path) {
  return strategy_from_json(read_json_file(path));
}

NormalFormGame normal_form_from_json(const Json& document) {
  return guarded([&] {
    check_version(document);
    NormalFormGame nfg;
    nfg.shape = as<std::vector<int>>(require(document, "shape"), "shape");
    nfg.payoffs = as<std::vector<std::vector<double>>>(require(document, "payoffs"), "payoffs");
    return nfg;
  });
}

Json normal_form_to_json(const NormalFormGame& nfg) {
  Json document;
  document["version"] = 1;
  document["shape"] = nfg.shape;
  document["payoffs"] = nfg.payoffs;
  return document;
}

GraphicalGame graphical_from_json(const Json& document) {
  return guarded([&] {
    check_version(document);
    GraphicalGame game;
    game.num_actions = as<std::vector<int>>(require(document, "num_actions"), "num_actions");
    game.parents = as<std::vector<std::vector<int>>>(require(document, "parents"), "parents");
    game.tables = as<std::vector<std::vector<double>>>(require(document, "tables"), "tables");
    return game;
  });
}

Json validation_to_json(const ValidationReport& report) {
  Json document;
  document["status"] = report.ok() ? "ok" : "invalid";
  Json list = Json::array();
  for (const auto& v : report.violations) {
    Json item;
    item["kind"] = v.kind;
    item["message"] = v.message;
    if (v.action >= 0) item["action"] = v.action;
    if (!v.counts.empty() || v.kind == "missing_entry") item["counts"] = v.counts;
    list.push_back(std::move(item));
  }
  document["violations"] = std::move(list);
  return document;
}

namespace {

Json matrix_rows(const Eigen::MatrixXd& values) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    std::vector<double> row(values.cols());
    for (Eigen::Index c = 0; c < values.cols(); ++c) row[c] = values(r, c);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

Json jacobian_to_json(const PayoffJacobian& jacobian) {
  Json document;
  document["m"] = jacobian.dimension();
  Json order = Json::array();
  for (const auto& [agent, action] : jacobian.order) order.push_back({agent, action});
  document["order"] = std::move(order);
  document["rows"] = matrix_rows(jacobian.values);
  document["method"] = std::string(to_string(jacobian.method));
  document["utility_evals"] = jacobian.counters.utility_evals;
  document["probability_evals"] = jacobian.counters.probability_evals;
  document["swap_updates"] = jacobian.counters.swap_updates;
  return document;
}

Json jacobian_to_json(const SymmetricJacobian& jacobian) {
  Json document;
  document["m"] = static_cast<int>(jacobian.actions.size());
  document["order"] = jacobian.actions;
  document["rows"] = matrix_rows(jacobian.values);
  document["method"] = "symmetric";
  document["utility_evals"] = jacobian.counters.utility_evals;
  document["probability_evals"] = jacobian.counters.probability_evals;
  document["note"] = "rows and columns are actions of the shared action set, not (agent, action) pairs";
  return document;
}

Json regret_to_json(const RegretReport& report, double eps) {
  Json document;
  Json agents = Json::array();
  for (std::size_t i = 0; i < report.agents.size(); ++i) {
    const auto& a = report.agents[i];
    agents.push_back({{"agent", i},
                      {"best_response_value", a.best_response_value},
                      {"current_value", a.current_value},
                      {"regret", a.regret}});
  }
  document["agents"] = std::move(agents);
  document["max_regret"] = report.max_regret;
  document["eps"] = eps;
  document["passes"] = report.passes(eps);
  return document;
}

Json diagnostics_to_json(const PathDiagnostics& d) {
  Json document;
  document["status"] = d.status;
  document["steps"] = d.steps;
  document["rejected_steps"] = d.rejected_steps;
  document["corrector_iterations"] = d.corrector_iterations;
  document["support_changes"] = d.support_changes;
  document["final_lambda"] = d.final_lambda;
  document["residual"] = d.residual;
  document["regret"] = d.regret;
  document["arclength"] = d.arclength;
  return document;
}

}  // namespace agg::io
