#include <doctest.h>

#include <cmath>
#include <random>

#include "prigp/aggregate.hpp"

using namespace prigp;

namespace {

KernelParams kernel1() {
  KernelParams p;
  p.signal_std = 1.0;
  p.inverse_lengthscales = {3.0};
  p.noise_std = 0.1;
  return p;
}

// Data-free models: mean = prior, variance = sigma_r^2 = 1.
std::vector<GpModel> prior_models(std::vector<const char*> priors) {
  std::vector<GpModel> out;
  for (const char* p : priors) {
    out.emplace_back(kernel1(), PriorMeanFunction(p, 1), Box{{0.0}, {1.0}});
    out.back().fit();
  }
  return out;
}

std::vector<GpModel> data_models(std::mt19937_64& rng, std::size_t count, bool shared) {
  std::uniform_real_distribution<double> u(0, 1);
  Dataset common;
  auto draw = [&] {
    Dataset d;
    for (int i = 0; i < 6; ++i) {
      const double x = u(rng);
      d.inputs.push_back({x});
      d.outputs.push_back(std::sin(6 * x));
    }
    return d;
  };
  common = draw();
  const char* priors[] = {"0", "x", "-1", "sin(6*x)", "0.5"};
  std::vector<GpModel> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.emplace_back(kernel1(), PriorMeanFunction(priors[i % 5], 1), Box{{0.0}, {1.0}},
                     shared ? common : draw());
    out.back().fit();
  }
  return out;
}

const std::vector<double> kX{0.3};

}  // namespace

TEST_CASE("baselines on data-free experts, hand-derived") {
  // Self prior 0.5, neighbours 1 and 2; every variance is 1, var_* = 1.01.
  const auto models = prior_models({"0.5", "1", "2"});
  const std::vector<AgentId> nb{0, 1, 2};
  CHECK(poe_predict(0, kX, models, nb).value == doctest::Approx(3.5 / 3.0).epsilon(1e-15));
  CHECK(gpoe_predict(0, kX, models, nb).value == doctest::Approx(3.5 / 3.0).epsilon(1e-15));
  CHECK(moe_predict(0, kX, models, nb).value == doctest::Approx(3.5 / 3.0).epsilon(1e-15));
  CHECK(igp_predict(1, kX, models).value == 1.0);

  const double bcm = (3.5 - 2.0 / 1.01 * 0.5) / (3.0 - 2.0 / 1.01);
  CHECK(bcm_predict(0, kX, models, nb).value == doctest::Approx(bcm).epsilon(1e-14));

  const double beta = 0.5 * std::log(1.01);
  const double prec = 3 * beta + (1 - 3 * beta) / 1.01;
  const double num = beta * 3.5 + (1 - 3 * beta) / 1.01 * 0.5;
  CHECK(rbcm_predict(0, kX, models, nb).value == doctest::Approx(num / prec).epsilon(1e-14));

  // BCM uses the aggregating agent's own prior for the correction.
  const double bcm1 = (3.5 - 2.0 / 1.01 * 1.0) / (3.0 - 2.0 / 1.01);
  CHECK(bcm_predict(1, kX, models, nb).value == doctest::Approx(bcm1).epsilon(1e-14));
}

TEST_CASE("two equal-variance experts: PoE is the midpoint") {
  const auto models = prior_models({"1", "2"});
  CHECK(poe_predict(0, kX, models, std::vector<AgentId>{0, 1}).value == 1.5);
}

TEST_CASE("counters and message accounting") {
  const auto models = prior_models({"0", "1", "2", "3"});
  const std::vector<AgentId> nb{0, 1, 3};
  auto r = poe_predict(1, kX, models, std::vector<AgentId>{0, 1, 3});
  CHECK(r.counters.messages == 2);
  CHECK(r.counters.var_evals == 3);
  r = moe_predict(0, kX, models, nb);
  CHECK(r.counters.var_evals == 0);
  CHECK(r.counters.mean_evals == 3);
  CHECK(igp_predict(0, kX, models).counters.messages == 0);
  CHECK_THROWS_AS(poe_predict(2, kX, models, nb), ContractError);  // self missing
}

TEST_CASE("prigp: election, weights, and the variance bypass at c = 1") {
  std::mt19937_64 rng(1);
  const auto models = data_models(rng, 4, false);
  const std::vector<AgentId> nb{0, 1, 2, 3};
  const auto trust = normalize_neighborhood(nb, std::vector<double>{0.3, 0.9, 0.1, 0.5});
  PriGpOptions o;
  o.sbar = 2;
  o.c = 1.0;
  for (const auto& m : models) m.reset_counters();
  const auto r = prigp_predict(0, kX, models, nb, &trust, o);
  REQUIRE(r.election);
  CHECK(r.election->elected == std::vector<AgentId>{0, 2});
  CHECK(r.counters.var_evals == 0);
  CHECK(r.counters.messages == 1);
  for (const auto& m : models) CHECK(m.variance_calls() == 0);
  CHECK(models[1].mean_calls() == 0);  // discharged agents are never asked
  CHECK(models[3].mean_calls() == 0);
  const double expected = r.weights->at(0) * models[0].posterior_mean(kX) +
                          r.weights->at(2) * models[2].posterior_mean(kX);
  CHECK(r.value == doctest::Approx(expected).epsilon(1e-15));
  CHECK(r.weights->at(2) > r.weights->at(0));

  o.c = 0.5;
  const auto h = prigp_predict(0, kX, models, nb, &trust, o);
  CHECK(h.counters.var_evals == 2);
  CHECK(h.weights->mode == WeightMode::kMixed);

  o.c = 0.0;
  const auto v = prigp_predict(0, kX, models, nb, &trust, o);
  const double p0 = 1 / models[0].posterior_variance(kX), p2 = 1 / models[2].posterior_variance(kX);
  CHECK(v.weights->at(0) == doctest::Approx(p0 / (p0 + p2)).epsilon(1e-14));
}

TEST_CASE("prigp cold start predicts with the own model only") {
  std::mt19937_64 rng(2);
  const auto models = data_models(rng, 3, true);
  PriGpOptions o;
  o.sbar = 1;
  const auto r = prigp_predict(2, kX, models, std::vector<AgentId>{0, 1, 2}, nullptr, o);
  CHECK(r.election->cold_start);
  CHECK(r.value == models[2].posterior_mean(kX));
  CHECK(r.counters.messages == 0);
}

TEST_CASE("models outside the neighbourhood are never touched") {
  std::mt19937_64 rng(3);
  const auto models = data_models(rng, 5, false);
  const std::vector<AgentId> nb{1, 2, 4};
  const auto trust = normalize_neighborhood(nb, std::vector<double>{0.2, 0.1, 0.3});
  for (const auto& m : models) m.reset_counters();
  PriGpOptions o;
  o.sbar = 1;
  o.c = 0.3;
  for (const char* name : {"prigp", "poe", "gpoe", "bcm", "rbcm", "moe", "igp"}) {
    aggregate(parse_method(name), 2, kX, models, nb, &trust, o);
  }
  CHECK(models[0].mean_calls() + models[0].variance_calls() == 0);
  CHECK(models[3].mean_calls() + models[3].variance_calls() == 0);
}

TEST_CASE("identical datasets collapse PoE, gPoE and MoE") {
  std::mt19937_64 rng(4);
  const auto models = data_models(rng, 4, true);
  const std::vector<AgentId> nb{0, 1, 3};
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 100; ++k) {
    const std::vector<double> x{u(rng)};
    const double poe = poe_predict(0, x, models, nb).value;
    CHECK(std::abs(poe - moe_predict(0, x, models, nb).value) < 1e-12);
    CHECK(std::abs(poe - gpoe_predict(0, x, models, nb).value) < 1e-12);
  }
}

TEST_CASE("method parsing") {
  CHECK(parse_method("prigp").c == 1.0);
  CHECK(parse_method("prigp", 0.5).c == 0.5);
  CHECK(parse_method("prigp@0.25").c == 0.25);
  CHECK(parse_method("prigp@0.25").label() == "prigp(c=0.25)");
  CHECK(parse_method("rbcm").kind == MethodKind::kRbcm);
  CHECK_THROWS_AS(parse_method("prigp@2"), ConfigError);
  CHECK_THROWS_AS(parse_method("poe@1"), ConfigError);
  CHECK_THROWS_AS(parse_method("prigp@x"), ConfigError);
  CHECK_THROWS_AS(parse_method("xyz"), ConfigError);
}
