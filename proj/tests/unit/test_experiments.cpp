#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "prigp/csv.hpp"
#include "prigp/experiments.hpp"

using namespace prigp;

namespace {

ExperimentConfig shipped(const char* name) {
  return load_config(std::string(PRIGP_SOURCE_DIR) + "/configs/" + name + ".json");
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("trial setup draws a shared dataset inside the domain") {
  const auto cfg = shipped("func_approx");
  const auto s = build_trial(cfg, 11);
  REQUIRE(s.models.size() == 4);
  for (const auto& m : s.models) {
    CHECK(m.fresh());
    CHECK(m.size() == 8);
    CHECK(m.data().inputs == s.models[0].data().inputs);
    for (std::size_t i = 0; i < m.size(); ++i) {
      CHECK(m.data().inputs[i][0] >= 0.0);
      CHECK(m.data().inputs[i][0] < 2 * M_PI);
      CHECK(m.data().outputs[i] == std::sin(2 * m.data().inputs[i][0]));  // noise-free outputs
    }
  }
  CHECK(build_trial(cfg, 11).models[0].data().inputs == s.models[0].data().inputs);
  CHECK(build_trial(cfg, 12).models[0].data().inputs != s.models[0].data().inputs);

  auto dyn = shipped("dyn_ident");
  const auto d = build_trial(dyn, 1);
  CHECK(d.models[0].size() == 100);
  CHECK(d.models[0].data().inputs != d.models[1].data().inputs);  // one dataset each
}

TEST_CASE("func-approx table integrity and output files") {
  auto cfg = shipped("func_approx");
  cfg.trials = 3;
  cfg.test.points = 100;
  const auto r = run_func_approx(cfg);
  REQUIRE(r.table.errors.size() == cfg.methods.size());
  for (std::size_t q = 0; q < cfg.methods.size(); ++q) {
    double s = 0.0;
    for (double v : r.table.errors[q]) s += v;
    CHECK(std::abs(s - r.table.sums[q]) <= 1e-12);
  }
  CHECK(r.traced.size() == 1);
  CHECK(r.var_calls[0] == 0);  // prigp(c=1)

  const auto dir = std::filesystem::temp_directory_path() / "prigp_fa_test";
  std::filesystem::remove_all(dir);
  write_func_approx(cfg, r, dir);
  const auto table = read_csv(dir / "results.csv");
  CHECK(table.header.back() == "sum");
  CHECK(table.rows.size() == cfg.methods.size());
  const auto trace = read_csv(dir / "trace.csv");
  CHECK(trace.header == std::vector<std::string>{"trial", "step", "t", "agent", "method", "f_true", "f_pred",
                                                 "abs_error", "elected_set", "msgs", "var_calls"});
  CHECK(trace.rows.size() == 100 * 4 * cfg.methods.size());
  CHECK(std::filesystem::exists(dir / "summary.json"));
  CHECK(!std::filesystem::exists(dir / "audit.csv"));

  cfg.output.audit = true;
  const auto again = run_func_approx(cfg);
  const auto dir2 = dir / "again";
  write_func_approx(cfg, again, dir2);
  CHECK(slurp(dir / "results.csv") == slurp(dir2 / "results.csv"));
  CHECK(slurp(dir / "trace.csv") == slurp(dir2 / "trace.csv"));
  CHECK(read_csv(dir2 / "audit.csv").rows.size() == 100 * 4);
  std::filesystem::remove_all(dir);
}

TEST_CASE("dyn-ident with c = 1 never evaluates a variance") {
  auto cfg = shipped("dyn_ident");
  cfg.trials = 2;
  cfg.output.trace_trials = 2;
  cfg.dynamics.system.steps = 40;
  cfg.methods = {parse_method("prigp@1")};
  const auto r = run_dyn_ident(cfg);
  for (const auto& ep : r.trials) {
    for (const auto& st : ep.steps) {
      for (const auto& e : st.entries) CHECK(e.counters.var_evals == 0);
    }
  }
  CHECK(r.summary.size() == 40 * 8);
  REQUIRE(r.trajectory_run);
  CHECK(r.true_trajectory.size() == 41);
  CHECK(r.true_trajectory[0] == std::vector<double>{0.0, 1.0, 1.05});
}

TEST_CASE("single trial summaries have zero spread") {
  auto cfg = shipped("dyn_ident");
  cfg.trials = 1;
  cfg.dynamics.system.steps = 20;
  cfg.dynamics.trajectories = false;
  const auto r = run_dyn_ident(cfg);
  for (const auto& row : r.summary) CHECK(row.std_abs_error == 0.0);
  CHECK(!r.trajectory_run);
}

TEST_CASE("bounds-check with data-free models") {
  auto cfg = shipped("bounds_check");
  cfg.data.points = 0;
  cfg.bounds.points = 50;
  const auto r = run_bounds_check(cfg);
  for (const auto& row : r.rows) {
    const auto& c = r.agents[row.agent].constants;
    CHECK(row.eta == doctest::Approx(std::sqrt(c.beta) * 1.0 + c.gamma * cfg.bounds.tau).epsilon(1e-14));
  }
}

TEST_CASE("halving tau halves the gamma-tau term while beta grows") {
  auto cfg = shipped("bounds_check");
  cfg.bounds.points = 10;
  const auto a = run_bounds_check(cfg);
  cfg.bounds.tau /= 2;
  const auto b = run_bounds_check(cfg);
  for (std::size_t i = 0; i < a.agents.size(); ++i) {
    CHECK(b.agents[i].constants.beta > a.agents[i].constants.beta);
    // gamma itself moves through sqrt(beta L tau); the tau factor halves.
    const double ta = a.agents[i].constants.gamma * 0.01, tb = b.agents[i].constants.gamma * 0.005;
    CHECK(tb < ta);
  }
}
