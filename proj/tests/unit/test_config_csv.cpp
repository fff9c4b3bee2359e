#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include <json.hpp>

#include "prigp/config.hpp"
#include "prigp/csv.hpp"
#include "prigp/error.hpp"

using namespace prigp;
using nlohmann::json;

namespace {

json minimal() {
  return json::parse(R"j({
    "experiment": "func-approx",
    "domain": {"lower": [0], "upper": [1]},
    "target": "sin(2*x)",
    "kernel": {"lengthscales": [0.2]},
    "agents": [{"prior": "0", "sbar": 1}, {"prior": "prior.cos2x", "sbar": 0}],
    "graph": {"adjacency": [[1, 1], [1, 1]]}
  })j");
}

std::string error_of(const json& j) {
  try {
    parse_config(j.dump(), "cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("defaults are filled in") {
  const auto cfg = parse_config(minimal().dump());
  CHECK(cfg.experiment == ExperimentKind::kFuncApprox);
  CHECK(cfg.agents[0].sigma_h == 1.0);
  CHECK(cfg.kernel.signal_std == 1.0);
  CHECK(cfg.kernel.noise_std == 0.1);
  CHECK(cfg.kernel.convention == "inverse");
  CHECK(cfg.kernel.params().inverse_lengthscales[0] == 0.2);
  CHECK(cfg.methods.size() == 1);
  CHECK(cfg.methods[0].kind == MethodKind::kPriGp);
  CHECK(cfg.test.points == 1000);
  CHECK(cfg.trials == 1);
  CHECK(cfg.rule == ElectionRule::kThreshold);
  CHECK(cfg.bounds.sigma_reading == SigmaReading::kStandardDeviation);
  CHECK(cfg.dynamics.system.dt == 0.01);
  CHECK(cfg.dynamics.system.steps == 150);
}

TEST_CASE("lengthscale convention divides") {
  auto j = minimal();
  j["kernel"]["convention"] = "lengthscale";
  CHECK(parse_config(j.dump()).kernel.params().inverse_lengthscales[0] == doctest::Approx(5.0));
}

TEST_CASE("schema violations name the JSON pointer") {
  auto j = minimal();
  j["agents"][1]["sbar"] = 2;
  CHECK(error_of(j).find("/agents/1/sbar") != std::string::npos);

  j = minimal();
  j["agents"][0]["sigma_h"] = -1;
  CHECK(error_of(j).find("/agents/0/sigma_h") != std::string::npos);

  j = minimal();
  j["agents"][0]["prior"] = "sin(";
  CHECK(error_of(j).find("/agents/0/prior") != std::string::npos);

  j = minimal();
  j["graph"]["adjacency"] = json::parse("[[1, 0], [1, 1]]");
  CHECK(error_of(j).find("/graph/adjacency") != std::string::npos);

  j = minimal();
  j.erase("target");
  CHECK(error_of(j).find("/target") != std::string::npos);

  j = minimal();
  j["kernel"]["lengthscales"] = json::parse("[0.2, 0.3]");
  CHECK(error_of(j).find("/kernel/lengthscales") != std::string::npos);

  j = minimal();
  j["methods"] = json::parse(R"(["poe", "magic"])");
  CHECK(error_of(j).find("/methods/1") != std::string::npos);

  j = minimal();
  j["bounds"] = json::parse(R"({"delta": 1.5})");
  CHECK(error_of(j).find("/bounds/delta") != std::string::npos);

  j = minimal();
  j["kernel"]["typo"] = 1;
  CHECK(error_of(j).find("/kernel/typo") != std::string::npos);

  j = minimal();
  j["experiment"] = "dyn-ident";
  CHECK(error_of(j).find("3-dimensional") != std::string::npos);
}

TEST_CASE("malformed JSON reports a byte offset") {
  try {
    parse_config("{\"experiment\": ", "broken.json");
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("broken.json") != std::string::npos);
    CHECK(std::string(e.what()).find("byte") != std::string::npos);
  }
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("shipped configs load") {
  for (const char* name : {"func_approx", "dyn_ident", "bounds_check"}) {
    const auto cfg = load_config(std::string(PRIGP_SOURCE_DIR) + "/configs/" + name + ".json");
    CHECK(!cfg.agents.empty());
  }
}

TEST_CASE("number formatting round-trips") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int k = 0; k < 2000; ++k) {
    const double v = k % 2 ? u(rng) : u(rng) * 1e-300;
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
}

TEST_CASE("CSV round trip at full precision") {
  const auto dir = std::filesystem::temp_directory_path() / "prigp_csv_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "t.csv";
  std::vector<double> values;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0, 100);
  {
    CsvWriter w(path, {"id", "label", "value"});
    for (int k = 0; k < 300; ++k) {
      values.push_back(g(rng));
      w.field(k).field(k % 2 ? "a,b" : "plain").field(values.back());
      w.end_row();
    }
    CHECK_THROWS(w.field(1).end_row());  // wrong column count
  }
  const auto t = read_csv(path);
  REQUIRE(t.rows.size() == 300);
  CHECK(t.header == std::vector<std::string>{"id", "label", "value"});
  for (int k = 0; k < 300; ++k) {
    CHECK(t.rows[k][1] == (k % 2 ? "a,b" : "plain"));
    CHECK(std::abs(std::stod(t.rows[k][2]) - values[k]) <= 1e-15 * std::abs(values[k]));
  }
  std::filesystem::remove_all(dir);
}
