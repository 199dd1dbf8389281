#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "agg/generators.hpp"
#include "agg/io.hpp"
#include "cli.hpp"
#include "support.hpp"

using namespace agg;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  io::Json document;
  std::string text;
};

Outcome agg_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  Outcome result{code, nullptr, out.str()};
  if (!result.text.empty()) result.document = io::Json::parse(result.text);
  return result;
}

class Scratch {
 public:
  Scratch() {
    dir_ = fs::temp_directory_path() / ("agg_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  ~Scratch() { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }
  std::string write(const std::string& name, const io::Json& doc) const {
    return write(name, doc.dump());
  }

 private:
  fs::path dir_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("generate and validate") {
  Scratch scratch;
  const auto ice = scratch.path("ice.json");
  auto r = agg_run({"generate", "--out", ice, "ice-cream", "--n", "3", "--locations", "4",
                    "--chocolate", "2"});
  REQUIRE(r.code == 0);
  CHECK(r.document["num_actions"] == 8);
  r = agg_run({"validate", ice});
  CHECK(r.code == 0);
  CHECK(r.document["status"] == "ok");

  const auto a = agg_run({"generate", "random", "--agents", "3", "--actions", "5", "--degree",
                          "2", "--seed", "7"});
  const auto b = agg_run({"generate", "random", "--agents", "3", "--actions", "5", "--degree",
                          "2", "--seed", "7"});
  CHECK(a.code == 0);
  CHECK(a.text == b.text);
  CHECK(agg_run({"validate", scratch.write("random.json", a.document)}).code == 0);

  auto broken = io::game_to_json(rock_paper_scissors(2));
  broken["utility"]["payload"]["0"].erase(0);
  r = agg_run({"validate", scratch.write("broken.json", broken)});
  CHECK(r.code == 1);
  CHECK(r.document["violations"][0]["kind"] == "missing_entry");
  CHECK(r.document["violations"][0].contains("counts"));

  CHECK(agg_run({"validate", scratch.write("bad.json", std::string("{not json"))}).code == 2);
  CHECK(agg_run({"validate", scratch.path("missing.json")}).code == 2);
  CHECK(agg_run({"generate", "ice-cream", "--n", "0"}).code == 2);
  CHECK(agg_run({"frobnicate"}).code == 2);

  const auto nfg = scratch.write(
      "pennies.nfg.json", io::normal_form_to_json({{2, 2}, {{1, -1, -1, 1}, {-1, 1, 1, -1}}}));
  r = agg_run({"generate", "encode-normal-form", nfg});
  CHECK(r.code == 0);
  CHECK(r.document["actions"].size() == 4);
}

TEST_CASE("jacobian command") {
  Scratch scratch;
  const auto game = generate_random({3, 4, 2, 3});
  const auto game_path = scratch.write("g.json", io::game_to_json(game));
  std::mt19937_64 rng(1);
  const auto strategy =
      scratch.write("s.json", io::strategy_to_json(test::random_profile(game, rng)));

  const auto naive = agg_run({"jacobian", game_path, "-s", strategy, "-m", "naive"});
  const auto part = agg_run({"jacobian", game_path, "-s", strategy, "-m", "partitioned", "-o",
                             scratch.path("J.json")});
  REQUIRE(naive.code == 0);
  REQUIRE(part.code == 0);
  const auto written = io::read_json_file(scratch.path("J.json"));
  for (std::size_t r = 0; r < naive.document["rows"].size(); ++r) {
    for (std::size_t c = 0; c < naive.document["rows"][r].size(); ++c) {
      CHECK(std::abs(naive.document["rows"][r][c].get<double>() -
                     written["rows"][r][c].get<double>()) <= 1e-10);
    }
  }
  CHECK(written["utility_evals"].get<std::uint64_t>() <
        naive.document["utility_evals"].get<std::uint64_t>());

  const auto ice = scratch.write("ice.json", io::game_to_json(generate_ice_cream({3, 4, 2})));
  const auto ice_s =
      scratch.write("ice_s.json", io::strategy_to_json(uniform_profile(generate_ice_cream({3, 4, 2}))));
  CHECK(agg_run({"jacobian", ice, "-s", ice_s, "-m", "symmetric"}).code == 2);

  const auto shared = generate_ice_cream({3, 2, 0, true});
  const auto shared_path = scratch.write("shared.json", io::game_to_json(shared));
  const auto shared_s = scratch.write("shared_s.json", io::strategy_to_json(uniform_profile(shared)));
  const auto sym = agg_run({"jacobian", shared_path, "-s", shared_s, "-m", "symmetric"});
  CHECK(sym.code == 0);
  CHECK(sym.document["method"] == "symmetric");
  CHECK(sym.document["m"] == 4);
}

TEST_CASE("solve and verify") {
  Scratch scratch;
  const auto rps = scratch.write("rps.json", io::game_to_json(rock_paper_scissors(3)));
  auto r = agg_run({"solve", rps, "--symmetric"});
  REQUIRE(r.code == 0);
  for (const auto& s : r.document["strategies"]) {
    for (const auto& p : s) CHECK(std::abs(p.get<double>() - 1.0 / 3) <= 1e-4);
  }

  const auto pennies = scratch.write("pennies.json", io::game_to_json(matching_pennies()));
  const auto out = scratch.path("pennies_eq.json");
  r = agg_run({"solve", pennies, "-o", out, "--trace", scratch.path("trace.jsonl")});
  REQUIRE(r.code == 0);
  for (const auto& s : r.document["strategies"]) {
    CHECK(std::abs(s[0].get<double>() - 0.5) <= 1e-4);
  }
  CHECK(!slurp(scratch.path("trace.jsonl")).empty());
  // The solve output is itself a strategy file.
  CHECK(agg_run({"verify", pennies, out}).code == 0);

  const auto ice = scratch.write("ice.json", io::game_to_json(generate_ice_cream({3, 4, 2})));
  r = agg_run({"solve", ice});
  CHECK(r.code == 0);
  CHECK(r.document["regret"]["max_regret"].get<double>() <= 1e-6);
  CHECK(r.document["verified_by"] == "oracle");

  const auto a = agg_run({"solve", ice, "--seed", "3"});
  const auto b = agg_run({"solve", ice, "--seed", "3"});
  CHECK(a.text == b.text);

  const auto rps2 = scratch.write("rps2.json", io::game_to_json(rock_paper_scissors(2)));
  r = agg_run({"verify", rps2,
               scratch.write("u.json", std::string(R"({"version":1,"strategies":[[0.3333333333333333,0.3333333333333333,0.3333333333333334],[0.3333333333333333,0.3333333333333333,0.3333333333333334]]})"))});
  CHECK(r.code == 0);
  r = agg_run({"verify", rps2,
               scratch.write("rock.json", std::string(R"({"version":1,"strategies":[[1,0,0],[1,0,0]]})"))});
  CHECK(r.code == 1);
  CHECK(r.document["max_regret"] == 1.0);
  r = agg_run({"verify", rps2,
               scratch.write("short.json", std::string(R"({"version":1,"strategies":[[1,0],[1,0,0]]})"))});
  CHECK(r.code == 2);

  CHECK(agg_run({"solve", ice, "--symmetric"}).code == 2);
  r = agg_run({"solve", ice, "--max-steps", "2"});
  CHECK(r.code == 3);
  CHECK(r.document.contains("last_point"));
}

TEST_CASE("bench command") {
  Scratch scratch;
  const auto ring = scratch.write("ring.json", io::game_to_json(test::ring_game(50, 3, 1)));
  const auto r = agg_run({"bench", ring, "--methods", "symmetric,partitioned", "--strategies", "2",
                          "--seed", "4"});
  REQUIRE(r.code == 0);
  const auto& sym = r.document["results"][0];
  CHECK(sym["status"] == "ok");
  // Each of the 3 rows walks C(48 + 2, 2) distributions for each of 3 columns.
  CHECK(sym["utility_evals"].get<double>() == 3.0 * 3.0 * 1225.0);
  const auto& part = r.document["results"][1];
  CHECK(part["status"] == "refused");

  const auto again = agg_run({"bench", ring, "--methods", "symmetric,partitioned", "--strategies",
                              "2", "--seed", "4"});
  CHECK(again.text == r.text);

  const auto ten = scratch.write("ten.json", io::game_to_json(test::ring_game(10, 3, 2)));
  const auto small = agg_run({"bench", ten, "--methods", "naive,partitioned"});
  REQUIRE(small.code == 0);
  // Per entry: 3^8 profiles against C(8 + 2, 2) distributions.
  CHECK(small.document["results"][0]["max_entry_utility_evals"] == 6561);
  CHECK(small.document["results"][1]["max_entry_utility_evals"] == 45);
}
