#include "doctest.h"
#include "json.hpp"

#include "hymh/field_io.hpp"
#include "hymh/random.hpp"
#include "hymh/scenario.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hymh;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string env(const char* name) {
  const char* v = std::getenv(name);
  REQUIRE_MESSAGE(v != nullptr, name << " is not set");
  return v;
}

std::string scenario(const std::string& name) { return env("HYMH_SCENARIOS") + "/" + name; }

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hymh_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int cli(const std::string& args) {
  const std::string cmd = env("HYMH_CLI") + " " + args + " > /dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("config parsing rejects malformed input") {
  CHECK_NOTHROW(parse_config(R"({"command": "solve", "grid": {"n": 1, "N": 16}})"));
  CHECK_THROWS_AS(parse_config("{ not json"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"command": "solve", "colour": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"grid": {"n": 1, "N": 16, "M": 3}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"grid": {"n": 3, "N": 16}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"grid": {"n": 1, "N": 24}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"command": "integrate"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"target": {"recipe": "manufactured", "epsilon": 0.1}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"target": {"recipe": "file", "path": "/nonexistent/P.bin"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"grid": {"n": "one", "N": 16}})"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);

  const ScenarioConfig c = parse_config(R"({"command": "flow", "seed": 9, "grid": {"n": 2, "N": 8},
    "higgs": {"recipe": "explicit", "components": [[[1, 0], [0, [0, 2]]], [[0, 0], [0, 0]]]}})");
  CHECK(c.command == "flow");
  CHECK(c.seed == 9);
  CHECK(c.n == 2);
  REQUIRE(c.higgs_components.size() == 2);
  CHECK(c.higgs_components[0](1, 1) == Complex(0, 2));
}

TEST_CASE("field files round trip") {
  const fs::path dir = scratch("io");
  const GridSpec g(1, 8, {1.0, 2.0});
  CounterRng rng(1);
  const MatrixField A = random_matrix_field(g, 3, rng, 2, 1.0);
  write_field((dir / "A.bin").string(), A);
  const MatrixField B = read_matrix_field((dir / "A.bin").string());
  CHECK(B.grid() == g);
  CHECK(sup_frobenius(A - B) == 0.0);
  CHECK_THROWS(read_scalar_field((dir / "A.bin").string()));

  const ScalarField f = random_trig_polynomial(g, rng, 2, 1.0, false);
  write_field((dir / "f.bin").string(), f);
  CHECK(sup_abs(read_scalar_field((dir / "f.bin").string()) - f) == 0.0);

  write_text(dir / "junk.bin", "NOPE and more bytes");
  CHECK_THROWS(read_matrix_field((dir / "junk.bin").string()));
}

TEST_CASE("solve with P = Omega passes without iterating") {
  const RunOutcome out = run_scenario(load_config(scenario("solve_trivial.json")), "");
  CHECK(out.status == 0);
  const json s = json::parse(out.summary);
  CHECK(s["schema_version"] == 1);
  CHECK(s["results"]["newton"][0]["iterations"] == 0);
  CHECK(s["verdicts"]["converged_0"] == true);
}

TEST_CASE("hypothesis violations are reported by name") {
  const RunOutcome out = run_scenario(load_config(scenario("chern_noncommuting.json")), "");
  CHECK(out.status == 3);
  CHECK(json::parse(out.summary)["violated_hypothesis"] == "θ∧θ=0");

  ScenarioConfig c = load_config(scenario("solve_trivial.json"));
  c.twist_recipe = "none";
  const RunOutcome untwisted = run_scenario(c, "");
  CHECK(untwisted.status == 3);
  // P = Omega here, and P is checked first.
  CHECK(json::parse(untwisted.summary)["violated_hypothesis"] == "P > 0");
}

TEST_CASE("target read from a field file") {
  const fs::path dir = scratch("target");
  const ScenarioConfig base = load_config(scenario("solve_trivial.json"));
  const Instance inst = build_instance(base);
  write_field((dir / "P.bin").string(), inst.P);
  write_text(dir / "bad.bin", "HYMX garbage");

  std::ifstream in(scenario("solve_trivial.json"));
  json doc = json::parse(in);
  doc["target"] = {{"recipe", "file"}, {"path", (dir / "P.bin").string()}};
  const RunOutcome ok = run_scenario(parse_config(doc.dump()), "");
  CHECK(ok.status == 0);
  CHECK(json::parse(ok.summary)["results"]["newton"][0]["iterations"] == 0);

  doc["target"]["path"] = (dir / "bad.bin").string();
  CHECK(run_scenario(parse_config(doc.dump()), "").status == 2);
  doc["grid"]["N"] = 32;
  doc["target"]["path"] = (dir / "P.bin").string();
  CHECK(run_scenario(parse_config(doc.dump()), "").status == 2);
}

TEST_CASE("fixed seeds give identical summaries") {
  const ScenarioConfig c = load_config(scenario("solve_trivial.json"));
  const RunOutcome a = run_scenario(c, ""), b = run_scenario(c, "");
  CHECK(strip_timing(a.summary) == strip_timing(b.summary));
  CHECK(json::parse(strip_timing(a.summary)).contains("timing") == false);
  ScenarioConfig other = c;
  other.seed = c.seed + 1;
  CHECK(strip_timing(run_scenario(other, "").summary) != strip_timing(a.summary));
}

TEST_CASE("command line exit codes") {
  const fs::path dir = scratch("cli");
  CHECK(cli("solve --config " + scenario("solve_trivial.json") + " --out " + (dir / "ok").string()) == 0);
  CHECK(fs::exists(dir / "ok" / "summary.json"));
  CHECK(fs::exists(dir / "ok" / "residuals.csv"));
  std::ifstream sj(dir / "ok" / "summary.json");
  CHECK(json::parse(sj)["status"] == 0);

  CHECK(cli("chern --config " + scenario("chern_noncommuting.json") + " --out " + (dir / "h").string()) == 3);
  // The subcommand must match the configured command.
  CHECK(cli("chern --config " + scenario("solve_trivial.json") + " --out " + (dir / "m").string()) == 2);
  write_text(dir / "bad.json", R"({"command": "solve", "grid": {"n": 1, "N": 16}, "typo": true})");
  CHECK(cli("solve --config " + (dir / "bad.json").string() + " --out " + (dir / "b").string()) == 2);
  CHECK(cli("solve") == 2);
  CHECK(cli("solve --config /nonexistent.json") == 2);
  // Command-line overrides reach the summary.
  CHECK(cli("solve --config " + scenario("solve_trivial.json") + " --seed 11 --grid-n 32 --out " +
            (dir / "o").string()) == 0);
  std::ifstream so(dir / "o" / "summary.json");
  const json s = json::parse(so);
  CHECK(s["seed"] == 11);
  CHECK(s["grid"]["N"] == 32);
}
