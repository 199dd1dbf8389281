#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "agg/continuation.hpp"
#include "agg/game.hpp"
#include "agg/generators.hpp"
#include "agg/io.hpp"
#include "agg/oracle.hpp"
#include "agg/payoff.hpp"
#include "agg/symmetric.hpp"

namespace py = pybind11;
using namespace agg;

namespace {

MixedProfile to_profile(const ActionGraphGame& game,
                        const std::vector<std::vector<double>>& strategies) {
  MixedProfile profile{strategies};
  check_profile(game, profile, 1e-9);
  return profile;
}

py::dict regret_dict(const RegretReport& report) {
  py::list agents;
  for (const auto& agent : report.agents) {
    py::dict entry;
    entry["best_response_value"] = agent.best_response_value;
    entry["current_value"] = agent.current_value;
    entry["regret"] = agent.regret;
    agents.append(entry);
  }
  py::dict out;
  out["agents"] = agents;
  out["max_regret"] = report.max_regret;
  return out;
}

py::dict jacobian_dict(const PayoffJacobian& jacobian) {
  py::dict out;
  out["values"] = jacobian.values;
  out["order"] = jacobian.order;
  out["method"] = std::string(to_string(jacobian.method));
  out["utility_evals"] = jacobian.counters.utility_evals;
  out["probability_evals"] = jacobian.counters.probability_evals;
  out["swap_updates"] = jacobian.counters.swap_updates;
  return out;
}

py::dict diagnostics_dict(const PathDiagnostics& d) {
  py::dict out;
  out["status"] = d.status;
  out["steps"] = d.steps;
  out["rejected_steps"] = d.rejected_steps;
  out["support_changes"] = d.support_changes;
  out["final_lambda"] = d.final_lambda;
  out["residual"] = d.residual;
  out["arclength"] = d.arclength;
  return out;
}

// cpp_int has no pybind11 caster; go through its decimal form.
py::int_ big_int(const boost::multiprecision::cpp_int& value) {
  return py::int_(py::reinterpret_steal<py::object>(
      PyLong_FromString(value.str().c_str(), nullptr, 10)));
}

py::dict solve(const ActionGraphGame& game, bool symmetric, const std::string& method,
               double eps, int max_steps, std::uint64_t seed,
               std::optional<std::vector<int>> bonus, unsigned threads) {
  game.require_valid();
  SolverOptions options;
  options.eps = eps;
  options.max_steps = max_steps;
  options.seed = seed;
  options.record_trace = false;
  options.engine.threads = threads;
  options.method = parse_method(method);
  if (options.method == JacobianMethod::symmetric) symmetric = true;

  MixedProfile profile;
  PathDiagnostics diagnostics;
  RegretReport regret;
  {
    py::gil_scoped_release release;
    if (symmetric) {
      std::optional<int> designated;
      if (bonus) {
        if (bonus->size() != 1) throw std::invalid_argument("symmetric bonus takes one action");
        designated = (*bonus)[0];
      }
      const auto start = make_start_symmetric(game, designated, options);
      const auto result = trace_path_symmetric(game, start, options);
      profile = result.profile(game);
      diagnostics = result.diagnostics;
      regret = result.regret;
    } else {
      if (options.method == JacobianMethod::symmetric) options.method = JacobianMethod::partitioned;
      const auto start = make_start(game, bonus, options);
      const auto result = trace_path(game, start, options);
      profile = result.profile;
      diagnostics = result.diagnostics;
      regret = result.regret;
    }
  }
  py::dict out;
  out["strategies"] = profile.strategies;
  out["regret"] = regret_dict(regret);
  out["diagnostics"] = diagnostics_dict(diagnostics);
  out["mode"] = symmetric ? "symmetric" : "full";
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Action-graph game payoff Jacobians and equilibrium continuation";

  py::register_exception<GameError>(m, "GameError", PyExc_ValueError);
  py::register_exception<CapExceeded>(m, "CapExceeded", PyExc_RuntimeError);
  py::register_exception<PathFailure>(m, "PathFailure", PyExc_RuntimeError);
  py::register_exception<io::FormatError>(m, "FormatError", PyExc_ValueError);

  py::class_<ActionGraphGame>(m, "Game")
      .def_property_readonly("num_agents", &ActionGraphGame::num_agents)
      .def_property_readonly("num_actions", &ActionGraphGame::num_actions)
      .def_property_readonly("actions", &ActionGraphGame::actions)
      .def_property_readonly("action_sets",
                             py::overload_cast<>(&ActionGraphGame::action_sets, py::const_))
      .def_property_readonly("neighbors",
                             py::overload_cast<>(&ActionGraphGame::neighbors, py::const_))
      .def_property_readonly("max_in_degree", &ActionGraphGame::max_in_degree)
      .def_property_readonly("dimension", &ActionGraphGame::dimension)
      .def_property_readonly("valid", &ActionGraphGame::valid)
      .def_property_readonly("is_linear", &ActionGraphGame::is_linear)
      .def_property_readonly("has_shared_action_sets", &ActionGraphGame::has_shared_action_sets)
      .def_property_readonly("violations",
                             [](const ActionGraphGame& game) {
                               py::list out;
                               for (const auto& v : game.validation().violations) {
                                 py::dict entry;
                                 entry["kind"] = v.kind;
                                 entry["message"] = v.message;
                                 entry["action"] = v.action;
                                 entry["counts"] = v.counts;
                                 out.append(entry);
                               }
                               return out;
                             })
      .def("to_json", [](const ActionGraphGame& game) { return io::game_to_json(game).dump(); })
      .def("uniform_profile",
           [](const ActionGraphGame& game) { return uniform_profile(game).strategies; })
      .def("__repr__", [](const ActionGraphGame& game) {
        return "<Game agents=" + std::to_string(game.num_agents()) +
               " actions=" + std::to_string(game.num_actions()) + ">";
      });

  m.def("game_from_json",
        [](const std::string& text) {
          return io::game_from_json(io::Json::parse(text));
        },
        py::arg("text"));
  m.def("load_game", &io::load_game, py::arg("path"));

  m.def("ice_cream",
        [](int agents, int locations, int chocolate, bool shared, double wc, double wv) {
          return generate_ice_cream({agents, locations, chocolate, shared, wc, wv});
        },
        py::arg("agents") = 3, py::arg("locations") = 4, py::arg("chocolate") = 1,
        py::arg("shared") = false, py::arg("chocolate_weight") = 1.0,
        py::arg("vanilla_weight") = 1.0);
  m.def("random_game",
        [](int agents, int actions, int degree, std::uint64_t seed, bool shared,
           const std::string& kind) {
          RandomGameOptions options{agents, actions, degree, seed, shared, UtilityKind::table};
          if (kind == "linear") {
            options.kind = UtilityKind::linear;
          } else if (kind != "table") {
            throw std::invalid_argument("kind must be 'table' or 'linear'");
          }
          return generate_random(options);
        },
        py::arg("agents") = 3, py::arg("actions") = 5, py::arg("max_in_degree") = 2,
        py::arg("seed") = 0, py::arg("shared") = false, py::arg("kind") = "table");
  m.def("matching_pennies", &matching_pennies);
  m.def("coordination", &coordination_2x2);
  m.def("rock_paper_scissors", &rock_paper_scissors, py::arg("agents") = 2);
  m.def("shared_coordination", &shared_coordination, py::arg("agents"), py::arg("actions"));
  m.def("encode_normal_form",
        [](std::vector<int> shape, std::vector<std::vector<double>> payoffs) {
          return encode_normal_form(NormalFormGame{std::move(shape), std::move(payoffs)});
        },
        py::arg("shape"), py::arg("payoffs"));

  m.def("expected_payoffs",
        [](const ActionGraphGame& game, const std::vector<std::vector<double>>& strategies,
           unsigned threads) {
          const auto profile = to_profile(game, strategies);
          EngineOptions options;
          options.threads = threads;
          py::gil_scoped_release release;
          return expected_payoffs(game, profile, options);
        },
        py::arg("game"), py::arg("strategies"), py::arg("threads") = 1);
  m.def("jacobian",
        [](const ActionGraphGame& game, const std::vector<std::vector<double>>& strategies,
           const std::string& method, unsigned threads) {
          const auto profile = to_profile(game, strategies);
          EngineOptions options;
          options.threads = threads;
          const JacobianMethod parsed = parse_method(method);
          if (parsed == JacobianMethod::symmetric) {
            throw std::invalid_argument("use jacobian_symmetric for the symmetric method");
          }
          PayoffJacobian jacobian;
          {
            py::gil_scoped_release release;
            jacobian = compute_jacobian(game, profile, parsed, options);
          }
          return jacobian_dict(jacobian);
        },
        py::arg("game"), py::arg("strategies"), py::arg("method") = "partitioned",
        py::arg("threads") = 1);
  m.def("jacobian_symmetric",
        [](const ActionGraphGame& game, const std::vector<double>& strategy) {
          SymmetricJacobian jacobian;
          {
            py::gil_scoped_release release;
            jacobian = jacobian_symmetric(game, strategy);
          }
          py::dict out;
          out["values"] = jacobian.values;
          out["actions"] = jacobian.actions;
          out["utility_evals"] = jacobian.counters.utility_evals;
          out["probability_evals"] = jacobian.counters.probability_evals;
          return out;
        },
        py::arg("game"), py::arg("strategy"));
  m.def("brute_jacobian",
        [](const ActionGraphGame& game, const std::vector<std::vector<double>>& strategies,
           std::uint64_t cap) {
          return oracle::brute_jacobian(game, to_profile(game, strategies), cap).values;
        },
        py::arg("game"), py::arg("strategies"), py::arg("cap") = oracle::kDefaultCap);
  m.def("verify_nash",
        [](const ActionGraphGame& game, const std::vector<std::vector<double>>& strategies,
           std::uint64_t cap) {
          return regret_dict(oracle::verify_nash(game, to_profile(game, strategies), cap));
        },
        py::arg("game"), py::arg("strategies"), py::arg("cap") = oracle::kDefaultCap);

  m.def("solve", &solve, py::arg("game"), py::arg("symmetric") = false,
        py::arg("method") = "partitioned", py::arg("eps") = 1e-6, py::arg("max_steps") = 100000,
        py::arg("seed") = 0, py::arg("bonus") = std::nullopt, py::arg("threads") = 1);

  m.def("retract",
        [](const Eigen::VectorXd& w, const std::vector<int>& blocks) {
          return retract(w, blocks);
        },
        py::arg("w"), py::arg("block_sizes"));
  m.def("project_to_simplex",
        [](const std::vector<double>& values) { return project_to_simplex(values); },
        py::arg("values"));
  m.def("count_projected_distributions", &count_projected_distributions, py::arg("n_bar"),
        py::arg("k"));
  m.def("class_size",
        [](const std::vector<int>& counts) { return big_int(class_size(counts)); },
        py::arg("counts"));
}
