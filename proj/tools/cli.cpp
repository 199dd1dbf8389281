#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "agg/continuation.hpp"
#include "agg/generators.hpp"
#include "agg/io.hpp"
#include "agg/oracle.hpp"
#include "agg/payoff.hpp"
#include "agg/symmetric.hpp"

namespace agg::cli {

namespace {

using io::Json;

// Ends a command early with an exit code and an error document.
struct Failure {
  int code;
  std::string message;
  Json detail = Json::object();
};

[[noreturn]] void usage(const std::string& message) { throw Failure{kUsage, message}; }

struct Globals {
  unsigned threads = 1;
  std::uint64_t profile_cap = 10'000'000;
  std::uint64_t oracle_cap = oracle::kDefaultCap;
};

EngineOptions engine_options(const Globals& globals) {
  EngineOptions engine;
  engine.threads = globals.threads;
  engine.profile_cap = globals.profile_cap;
  return engine;
}

ActionGraphGame load_valid_game(const std::string& path) {
  ActionGraphGame game = [&] {
    try {
      return io::load_game(path);
    } catch (const io::FormatError& error) {
      usage(error.what());
    }
  }();
  if (!game.valid()) {
    throw Failure{kFailed, "game '" + path + "' is not valid",
                  {{"validation", io::validation_to_json(game.validation())}}};
  }
  return game;
}

// Checks the strategy file against the game and removes rounding noise from
// hand-written files by renormalizing each vector.
MixedProfile load_profile(const ActionGraphGame& game, const std::string& path) {
  MixedProfile profile;
  try {
    profile = io::load_strategy(path);
    check_profile(game, profile, 1e-6);
  } catch (const io::FormatError& error) {
    usage(error.what());
  } catch (const GameError& error) {
    usage(std::string("strategy does not fit the game: ") + error.what());
  }
  for (auto& strategy : profile.strategies) {
    double sum = 0.0;
    for (double p : strategy) sum += p;
    for (double& p : strategy) p /= sum;
  }
  return profile;
}

bool identical_strategies(const MixedProfile& profile) {
  for (const auto& s : profile.strategies) {
    if (s != profile.strategies.front()) return false;
  }
  return true;
}

int parse_action(const ActionGraphGame& game, const std::string& token) {
  if (const auto found = game.find_action(token)) return *found;
  try {
    std::size_t used = 0;
    const int index = std::stoi(token, &used);
    if (used == token.size() && index >= 0 && index < game.num_actions()) return index;
  } catch (const std::exception&) {
  }
  usage("unknown action '" + token + "'");
}

struct Verification {
  RegretReport report;
  std::string source;
};

// Oracle regret when the normal form fits under the cap, engine regret
// otherwise.
Verification verify_profile(const ActionGraphGame& game, const MixedProfile& profile,
                            const Globals& globals) {
  try {
    return {oracle::verify_nash(game, profile, globals.oracle_cap), "oracle"};
  } catch (const CapExceeded&) {
  }
  if (game.has_shared_action_sets() && identical_strategies(profile)) {
    return {symmetric_regret(game, profile.strategies.front()), "symmetric-engine"};
  }
  return {engine_regret(game, profile, engine_options(globals)), "engine"};
}

// ---------------------------------------------------------------------------

struct ValidateArgs {
  std::string game;
};

int cmd_validate(const ValidateArgs& args, Json& out) {
  ActionGraphGame game = [&] {
    try {
      return io::load_game(args.game);
    } catch (const io::FormatError& error) {
      usage(error.what());
    }
  }();
  out = io::validation_to_json(game.validation());
  return game.valid() ? kOk : kFailed;
}

struct JacobianArgs {
  std::string game;
  std::string strategy;
  std::string method = "partitioned";
  std::string output;
};

int cmd_jacobian(const JacobianArgs& args, const Globals& globals, Json& out) {
  const ActionGraphGame game = load_valid_game(args.game);
  const MixedProfile profile = load_profile(game, args.strategy);
  JacobianMethod method{};
  try {
    method = parse_method(args.method);
  } catch (const std::invalid_argument& error) {
    usage(error.what());
  }
  Json document;
  if (method == JacobianMethod::symmetric) {
    if (!game.has_shared_action_sets()) {
      usage("the symmetric method needs identical action sets for all agents");
    }
    if (!identical_strategies(profile)) {
      usage("the symmetric method needs every agent to play the same strategy");
    }
    document = io::jacobian_to_json(jacobian_symmetric(game, profile.strategies.front()));
  } else {
    try {
      document = io::jacobian_to_json(compute_jacobian(game, profile, method, engine_options(globals)));
    } catch (const CapExceeded& error) {
      throw Failure{kComputation, error.what()};
    }
  }
  if (args.output.empty()) {
    out = std::move(document);
  } else {
    io::write_json_file(args.output, document);
    out = {{"written", args.output},
           {"m", document["m"]},
           {"method", document["method"]},
           {"utility_evals", document["utility_evals"]},
           {"probability_evals", document["probability_evals"]}};
  }
  return kOk;
}

struct SolveArgs {
  std::string game;
  bool symmetric = false;
  std::string method = "partitioned";
  double eps = 1e-6;
  int max_steps = 100000;
  std::vector<std::string> bonus;
  std::uint64_t seed = 0;
  std::string output;
  std::string trace;
  double corrector_tolerance = 1e-10;
  double initial_step = 0.01;
};

Json point_json(const PathPoint& point, const std::vector<int>& blocks) {
  const Eigen::VectorXd sigma = retract(point.w, blocks);
  return {{"lambda", point.lambda},
          {"w", std::vector<double>(point.w.data(), point.w.data() + point.w.size())},
          {"sigma", std::vector<double>(sigma.data(), sigma.data() + sigma.size())}};
}

void write_trace(const std::string& path, const PathDiagnostics& diagnostics) {
  std::ofstream trace(path);
  if (!trace) throw io::FormatError("cannot write '" + path + "'");
  for (std::size_t k = 0; k < diagnostics.lambda_trace.size(); ++k) {
    trace << Json{{"point", k},
                  {"lambda", diagnostics.lambda_trace[k]},
                  {"residual", diagnostics.residual_trace[k]}}
                 .dump()
          << '\n';
  }
}

int cmd_solve(const SolveArgs& args, const Globals& globals, Json& out) {
  const ActionGraphGame game = load_valid_game(args.game);
  SolverOptions options;
  options.eps = args.eps;
  options.max_steps = args.max_steps;
  options.seed = args.seed;
  options.corrector_tolerance = args.corrector_tolerance;
  options.initial_step = args.initial_step;
  options.engine = engine_options(globals);
  options.record_trace = !args.trace.empty();
  try {
    options.method = parse_method(args.method);
  } catch (const std::invalid_argument& error) {
    usage(error.what());
  }
  const bool symmetric = args.symmetric || options.method == JacobianMethod::symmetric;
  if (symmetric && !game.has_shared_action_sets()) {
    usage("symmetric mode needs identical action sets for all agents");
  }

  std::vector<int> designated;
  for (const auto& token : args.bonus) designated.push_back(parse_action(game, token));
  if (!designated.empty()) {
    const std::size_t expected = symmetric ? 1 : static_cast<std::size_t>(game.num_agents());
    if (designated.size() != expected) {
      usage("--bonus needs " + std::to_string(expected) + " action(s)");
    }
  }

  StartPoint start;
  MixedProfile profile;
  PathDiagnostics diagnostics;
  std::vector<int> blocks = symmetric ? std::vector<int>{static_cast<int>(game.action_set(0).size())}
                                      : block_sizes(game);
  try {
    if (symmetric) {
      start = make_start_symmetric(
          game, designated.empty() ? std::nullopt : std::optional<int>(designated[0]), options);
      const auto result = trace_path_symmetric(game, start, options);
      profile = result.profile(game);
      diagnostics = result.diagnostics;
    } else {
      options.method = options.method == JacobianMethod::symmetric ? JacobianMethod::partitioned
                                                                   : options.method;
      start = make_start(
          game, designated.empty() ? std::nullopt : std::optional<std::vector<int>>(designated),
          options);
      const auto result = trace_path(game, start, options);
      profile = result.profile;
      diagnostics = result.diagnostics;
    }
  } catch (const PathFailure& failure) {
    if (!args.trace.empty()) write_trace(args.trace, failure.diagnostics);
    throw Failure{kComputation, failure.what(),
                  {{"last_point", point_json(failure.last, blocks)},
                   {"diagnostics", io::diagnostics_to_json(failure.diagnostics)}}};
  } catch (const CapExceeded& error) {
    throw Failure{kComputation, error.what()};
  } catch (const GameError& error) {
    usage(error.what());
  }

  const Verification verification = verify_profile(game, profile, globals);
  Json document = io::strategy_to_json(profile);
  document["mode"] = symmetric ? "symmetric" : "full";
  Json bonus = Json::object();
  std::vector<int> bonus_actions;
  for (std::size_t b = 0; b < start.bonus.designated.size(); ++b) {
    const int agent = symmetric ? 0 : static_cast<int>(b);
    bonus_actions.push_back(game.action_set(agent)[start.bonus.designated[b]]);
  }
  bonus["actions"] = bonus_actions;
  bonus["magnitude"] = start.bonus.magnitude;
  document["bonus"] = std::move(bonus);
  document["diagnostics"] = io::diagnostics_to_json(diagnostics);
  document["regret"] = io::regret_to_json(verification.report, args.eps);
  document["verified_by"] = verification.source;
  if (!args.output.empty()) io::write_json_file(args.output, document);
  if (!args.trace.empty()) write_trace(args.trace, diagnostics);
  out = std::move(document);
  return verification.report.passes(args.eps) ? kOk : kFailed;
}

struct VerifyArgs {
  std::string game;
  std::string strategy;
  double eps = 1e-6;
};

int cmd_verify(const VerifyArgs& args, const Globals& globals, Json& out) {
  const ActionGraphGame game = load_valid_game(args.game);
  const MixedProfile profile = load_profile(game, args.strategy);
  const Verification verification = verify_profile(game, profile, globals);
  out = io::regret_to_json(verification.report, args.eps);
  out["verified_by"] = verification.source;
  return verification.report.passes(args.eps) ? kOk : kFailed;
}

struct BenchArgs {
  std::string game;
  std::vector<std::string> methods;
  int strategies = 3;
  std::uint64_t seed = 0;
  bool timing = false;
};

std::vector<double> random_simplex_point(std::size_t size, std::mt19937_64& rng) {
  std::vector<double> point(size);
  double sum = 0.0;
  for (double& p : point) {
    const double u = static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
    p = -std::log(u);
    sum += p;
  }
  for (double& p : point) p /= sum;
  return point;
}

int cmd_bench(const BenchArgs& args, const Globals& globals, Json& out) {
  const ActionGraphGame game = load_valid_game(args.game);
  if (args.strategies < 1) usage("--strategies must be positive");
  std::vector<std::string> methods = args.methods;
  if (methods.empty()) {
    methods = {"naive", "projected", "partitioned"};
    if (game.has_shared_action_sets()) methods.push_back("symmetric");
  }
  std::vector<JacobianMethod> parsed;
  for (const auto& name : methods) {
    try {
      parsed.push_back(parse_method(name));
    } catch (const std::invalid_argument& error) {
      usage(error.what());
    }
  }

  // Samples are drawn once and shared by every method.
  std::mt19937_64 rng(args.seed);
  std::vector<MixedProfile> samples(args.strategies);
  for (auto& profile : samples) {
    for (int i = 0; i < game.num_agents(); ++i) {
      profile.strategies.push_back(random_simplex_point(game.action_set(i).size(), rng));
    }
  }

  Json results = Json::array();
  const EngineOptions engine = engine_options(globals);
  for (JacobianMethod method : parsed) {
    Json row;
    row["method"] = std::string(to_string(method));
    if (method == JacobianMethod::symmetric && !game.has_shared_action_sets()) {
      row["status"] = "skipped";
      row["reason"] = "needs identical action sets for all agents";
      results.push_back(std::move(row));
      continue;
    }
    EvalCounters total;
    std::uint64_t max_entry = 0;
    double seconds = 0.0;
    try {
      for (const auto& profile : samples) {
        const auto begin = std::chrono::steady_clock::now();
        if (method == JacobianMethod::symmetric) {
          // The symmetric engine takes one shared strategy: agent 0's sample.
          const auto jacobian = jacobian_symmetric(game, profile.strategies.front());
          total += jacobian.counters;
          for (auto e : jacobian.row_entry_evals) max_entry = std::max(max_entry, e);
        } else {
          const auto jacobian = compute_jacobian(game, profile, method, engine);
          total += jacobian.counters;
          for (auto e : jacobian.entry_utility_evals) max_entry = std::max(max_entry, e);
        }
        seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
      }
    } catch (const CapExceeded& error) {
      row["status"] = "refused";
      row["reason"] = error.what();
      results.push_back(std::move(row));
      continue;
    }
    const double k = args.strategies;
    row["status"] = "ok";
    row["utility_evals"] = static_cast<double>(total.utility_evals) / k;
    row["probability_evals"] = static_cast<double>(total.probability_evals) / k;
    row["swap_updates"] = static_cast<double>(total.swap_updates) / k;
    row["max_entry_utility_evals"] = max_entry;
    if (args.timing) row["wall_seconds"] = seconds / k;
    results.push_back(std::move(row));
  }
  out = {{"game",
          {{"num_agents", game.num_agents()},
           {"num_actions", game.num_actions()},
           {"max_in_degree", game.max_in_degree()},
           {"dimension", game.dimension()}}},
         {"strategies", args.strategies},
         {"seed", args.seed},
         {"results", std::move(results)}};
  return kOk;
}

struct GenerateArgs {
  IceCreamOptions ice;
  RandomGameOptions random;
  std::string kind = "table";
  std::string input;
  std::string fixture;
  int fixture_agents = 2;
  int fixture_actions = 2;
  std::string output;
};

int emit_game(const ActionGraphGame& game, const std::string& output, Json& out) {
  if (!game.valid()) {
    throw Failure{kComputation, "generated game failed validation",
                  {{"validation", io::validation_to_json(game.validation())}}};
  }
  Json document = io::game_to_json(game);
  if (output.empty()) {
    out = std::move(document);
  } else {
    io::write_json_file(output, document);
    out = {{"written", output},
           {"num_agents", game.num_agents()},
           {"num_actions", game.num_actions()},
           {"max_in_degree", game.max_in_degree()}};
  }
  return kOk;
}

ActionGraphGame build_fixture(const GenerateArgs& args) {
  if (args.fixture == "matching-pennies") return matching_pennies();
  if (args.fixture == "coordination") return coordination_2x2();
  if (args.fixture == "rps") return rock_paper_scissors(args.fixture_agents);
  if (args.fixture == "shared-coordination") {
    return shared_coordination(args.fixture_agents, args.fixture_actions);
  }
  usage("unknown fixture '" + args.fixture + "'");
}

Json error_document(int code, const std::string& message, Json detail) {
  Json document;
  document["error"] = message;
  document["exit_code"] = code;
  for (auto& [key, value] : detail.items()) document[key] = value;
  return document;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Action-graph game toolkit", "agg"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML or INI file with option defaults ([solve] eps = ...)");

  Globals globals;
  app.add_option("--threads", globals.threads, "Worker threads for Jacobian rows")
      ->envname("AGG_THREADS")
      ->check(CLI::PositiveNumber);
  app.add_option("--cap", globals.profile_cap,
                 "Largest number of opponent profiles one Jacobian entry may enumerate");
  app.add_option("--oracle-cap", globals.oracle_cap,
                 "Largest normal form the brute-force verifier will expand");

  ValidateArgs validate;
  auto* validate_cmd = app.add_subcommand("validate", "Check a game file");
  validate_cmd->add_option("game", validate.game, "Game file")->required();

  JacobianArgs jacobian;
  auto* jacobian_cmd = app.add_subcommand("jacobian", "Compute the payoff Jacobian");
  jacobian_cmd->add_option("game", jacobian.game, "Game file")->required();
  jacobian_cmd->add_option("-s,--strategy", jacobian.strategy, "Strategy file")->required();
  jacobian_cmd->add_option("-m,--method", jacobian.method,
                           "naive | projected | partitioned | symmetric");
  jacobian_cmd->add_option("-o,--out", jacobian.output, "Write the Jacobian here");

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Find a Nash equilibrium by continuation");
  solve_cmd->add_option("game", solve.game, "Game file")->required();
  solve_cmd->add_flag("--symmetric", solve.symmetric, "Solve for a symmetric equilibrium");
  solve_cmd->add_option("--method", solve.method, "Jacobian method for the full system");
  solve_cmd->add_option("--eps", solve.eps, "Regret tolerance for success");
  solve_cmd->add_option("--max-steps", solve.max_steps, "Path step budget");
  solve_cmd->add_option("--bonus", solve.bonus,
                        "Designated action per agent (one in symmetric mode), by name or index")
      ->delimiter(',');
  solve_cmd->add_option("--seed", solve.seed, "Seed for the bonus jitter");
  solve_cmd->add_option("-o,--out", solve.output, "Write the strategy document here");
  solve_cmd->add_option("--trace", solve.trace, "Write lambda and residual per point as JSON lines");
  solve_cmd->add_option("--corrector-tol", solve.corrector_tolerance, "Corrector tolerance");
  solve_cmd->add_option("--initial-step", solve.initial_step, "Initial step length");

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "Compute regrets of a profile");
  verify_cmd->add_option("game", verify.game, "Game file")->required();
  verify_cmd->add_option("strategy", verify.strategy, "Strategy file")->required();
  verify_cmd->add_option("--eps", verify.eps, "Regret tolerance");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Compare Jacobian methods on random profiles");
  bench_cmd->add_option("game", bench.game, "Game file")->required();
  bench_cmd->add_option("--methods", bench.methods, "Comma-separated methods")->delimiter(',');
  bench_cmd->add_option("--strategies", bench.strategies, "Number of random profiles");
  bench_cmd->add_option("--seed", bench.seed, "Seed for the random profiles");
  bench_cmd->add_flag("--timing", bench.timing, "Include wall-clock seconds (not reproducible)");

  GenerateArgs generate;
  auto* generate_cmd = app.add_subcommand("generate", "Write an example game");
  generate_cmd->require_subcommand(1);
  generate_cmd->add_option("--out", generate.output, "Write the game here instead of stdout");
  auto* ice_cmd = generate_cmd->add_subcommand("ice-cream", "Ice-cream vendor game");
  ice_cmd->add_option("--n", generate.ice.agents, "Vendors")->check(CLI::PositiveNumber);
  ice_cmd->add_option("--locations", generate.ice.locations, "Locations")
      ->check(CLI::PositiveNumber);
  ice_cmd->add_option("--chocolate", generate.ice.chocolate, "Chocolate-only vendors");
  ice_cmd->add_flag("--shared", generate.ice.shared, "Every vendor may sell either flavor");
  ice_cmd->add_option("--wc", generate.ice.chocolate_weight, "Same-flavor penalty");
  ice_cmd->add_option("--wv", generate.ice.vanilla_weight, "Other-flavor gain");
  auto* random_cmd = generate_cmd->add_subcommand("random", "Random action-graph game");
  random_cmd->add_option("--agents", generate.random.agents, "Agents")->check(CLI::PositiveNumber);
  random_cmd->add_option("--actions", generate.random.actions, "Actions")
      ->check(CLI::PositiveNumber);
  random_cmd->add_option("--degree", generate.random.max_in_degree, "Maximum in-degree")
      ->check(CLI::NonNegativeNumber);
  random_cmd->add_option("--seed", generate.random.seed, "Seed");
  random_cmd->add_flag("--shared", generate.random.shared, "Identical action sets");
  random_cmd->add_option("--kind", generate.kind, "table | linear")
      ->check(CLI::IsMember({"table", "linear"}));
  auto* nfg_cmd = generate_cmd->add_subcommand("encode-normal-form", "Encode payoff tensors");
  nfg_cmd->add_option("input", generate.input, "Normal-form file")->required();
  auto* graphical_cmd = generate_cmd->add_subcommand("encode-graphical", "Encode a graphical game");
  graphical_cmd->add_option("input", generate.input, "Graphical game file")->required();
  auto* fixture_cmd = generate_cmd->add_subcommand("fixture", "Small reference games");
  fixture_cmd->add_option("name", generate.fixture,
                          "matching-pennies | coordination | rps | shared-coordination")
      ->required();
  fixture_cmd->add_option("--agents", generate.fixture_agents, "Agents (rps, shared-coordination)")
      ->check(CLI::PositiveNumber);
  fixture_cmd->add_option("--actions", generate.fixture_actions, "Actions (shared-coordination)")
      ->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    out << error_document(kUsage, e.what(), Json::object()).dump(2) << '\n';
    return kUsage;
  }

  Json document;
  int code = kOk;
  try {
    if (*validate_cmd) {
      code = cmd_validate(validate, document);
    } else if (*jacobian_cmd) {
      code = cmd_jacobian(jacobian, globals, document);
    } else if (*solve_cmd) {
      code = cmd_solve(solve, globals, document);
    } else if (*verify_cmd) {
      code = cmd_verify(verify, globals, document);
    } else if (*bench_cmd) {
      code = cmd_bench(bench, globals, document);
    } else if (*ice_cmd) {
      code = emit_game(generate_ice_cream(generate.ice), generate.output, document);
    } else if (*random_cmd) {
      generate.random.kind = generate.kind == "linear" ? UtilityKind::linear : UtilityKind::table;
      code = emit_game(generate_random(generate.random), generate.output, document);
    } else if (*nfg_cmd) {
      code = emit_game(encode_normal_form(io::normal_form_from_json(io::read_json_file(generate.input))),
                       generate.output, document);
    } else if (*graphical_cmd) {
      code = emit_game(encode_graphical_game(io::graphical_from_json(io::read_json_file(generate.input))),
                       generate.output, document);
    } else if (*fixture_cmd) {
      code = emit_game(build_fixture(generate), generate.output, document);
    }
  } catch (const Failure& failure) {
    err << "agg: " << failure.message << '\n';
    document = error_document(failure.code, failure.message, failure.detail);
    code = failure.code;
  } catch (const io::FormatError& error) {
    err << "agg: " << error.what() << '\n';
    document = error_document(kUsage, error.what(), Json::object());
    code = kUsage;
  } catch (const GameError& error) {
    err << "agg: " << error.what() << '\n';
    document = error_document(kUsage, error.what(), Json::object());
    code = kUsage;
  } catch (const std::exception& error) {
    err << "agg: " << error.what() << '\n';
    document = error_document(kComputation, error.what(), Json::object());
    code = kComputation;
  }
  out << document.dump(2) << '\n';
  return code;
}

}  // namespace agg::cli
