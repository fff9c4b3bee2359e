#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "prigp/bounds.hpp"
#include "prigp/elective.hpp"

using namespace prigp;

namespace {

BoundParams line_params(double tau = 0.1, double delta = 0.01) {
  BoundParams p;
  p.tau = tau;
  p.delta = delta;
  p.domain = Box{{0.0}, {2 * std::numbers::pi}};
  p.L_f = 2.0;
  p.L_fhat = 0.0;
  return p;
}

KernelParams kernel(std::size_t m) {
  KernelParams k;
  k.signal_std = 1.0;
  k.inverse_lengthscales.assign(m, 1.0);
  k.noise_std = 0.1;
  return k;
}

}  // namespace

TEST_CASE("beta constant") {
  const double expected = 2 * std::log(5 * 2 * std::numbers::pi + 1) + 2 * std::log(100.0);
  CHECK(beta_constant(line_params()) == doctest::Approx(expected).epsilon(1e-15));
  auto p = line_params();
  p.delta = 1 - 1e-16;
  CHECK(beta_constant(p) == doctest::Approx(2 * std::log(5 * 2 * std::numbers::pi + 1)).epsilon(1e-12));
  CHECK(beta_constant(line_params(0.05)) > beta_constant(line_params(0.1)));
  BoundParams cube;
  cube.tau = 0.5;
  cube.delta = 0.1;
  cube.domain = Box{{0, 0, 0}, {1, 2, 3}};
  const double s = std::sqrt(3.0);
  CHECK(beta_constant(cube) ==
        doctest::Approx(2 * (std::log(s + 1) + std::log(2 * s + 1) + std::log(3 * s + 1)) - 2 * std::log(0.1)));
  auto bad = line_params();
  bad.delta = 1.0;
  CHECK_THROWS_AS(beta_constant(bad), ConfigError);
  bad = line_params(0.0);
  CHECK_THROWS_AS(beta_constant(bad), ConfigError);
}

TEST_CASE("variance Lipschitz constant") {
  GpModel empty(kernel(1), PriorMeanFunction::zero(1), Box{{0}, {1}});
  empty.fit();
  CHECK(variance_lipschitz(empty, 0.7) == 1.4);
  GpModel one(kernel(1), PriorMeanFunction::zero(1), Box{{0}, {1}}, Dataset{{{0.5}}, {1.0}});
  one.fit();
  CHECK(variance_lipschitz(one, 0.7) == doctest::Approx(2 * 0.7 * (1 + 1 / 1.01)).epsilon(1e-14));
  GpModel stale(kernel(1), PriorMeanFunction::zero(1), Box{{0}, {1}}, Dataset{{{0.5}}, {1.0}});
  CHECK_THROWS_AS(variance_lipschitz(stale, 0.7), ContractError);
}

TEST_CASE("gamma constant against an explicit inverse") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 1), y(-1, 1);
  for (int rep = 0; rep < 20; ++rep) {
    Dataset d;
    for (int i = 0; i < 5; ++i) {
      d.inputs.push_back({u(rng), u(rng)});
      d.outputs.push_back(y(rng));
    }
    GpModel g(kernel(2), PriorMeanFunction("x - 0.5*y", 2), Box{{0, 0}, {1, 1}}, d);
    g.fit();
    BoundParams p;
    p.tau = 0.01;
    p.delta = 0.05;
    p.domain = g.domain();
    p.L_f = 1.5;
    p.L_fhat = 1.2;
    const double beta = beta_constant(p);

    const Eigen::MatrixXd kinv = gram_matrix(d, g.params()).inverse();
    Eigen::VectorXd r(5);
    for (int i = 0; i < 5; ++i) r(i) = d.outputs[i] - (d.inputs[i][0] - 0.5 * d.inputs[i][1]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(kinv);
    const double lk = std::exp(-0.5);  // sigma_r^2 max l e^{-1/2}
    const double ls2 = 2 * lk * (1 + 5 * svd.singularValues()(0) * 1.0);
    const double expected = 1.5 + 1.2 + std::sqrt(beta * ls2 * 0.01) + std::sqrt(5.0) * lk * (kinv * r).norm();
    CHECK(gamma_constant(g, p, beta) == doctest::Approx(expected).epsilon(1e-10));
    const auto c = bound_constants(g, p);
    CHECK(c.L_sigma2 == doctest::Approx(ls2).epsilon(1e-10));
    CHECK(c.gamma == gamma_constant(g, p, beta));
  }
}

TEST_CASE("gamma without data or with an exact prior drops the residual term") {
  auto p = line_params(0.01, 0.05);
  GpModel empty(kernel(1), PriorMeanFunction("sin(2*x)", 1), p.domain);
  empty.fit();
  const double beta = beta_constant(p);
  const double lk = std::exp(-0.5);
  CHECK(gamma_constant(empty, p, beta) == doctest::Approx(2.0 + std::sqrt(beta * 2 * lk * 0.01)));
  Dataset d{{{1.0}, {2.0}}, {std::sin(2.0), std::sin(4.0)}};
  GpModel exact(kernel(1), PriorMeanFunction("sin(2*x)", 1), p.domain, d);
  exact.fit();
  const double ls2 = variance_lipschitz(exact, lk);
  CHECK(gamma_constant(exact, p, beta) == doctest::Approx(2.0 + std::sqrt(beta * ls2 * 0.01)).epsilon(1e-14));
}

TEST_CASE("single-model bound") {
  auto p = line_params(0.01, 0.05);
  GpModel empty(kernel(1), PriorMeanFunction::zero(1), p.domain);
  empty.fit();
  const double beta = beta_constant(p);
  const std::vector<double> x{1.0};
  CHECK(single_model_bound(empty, x, p, beta, 3.0) == doctest::Approx(std::sqrt(beta) + 0.03));
  CHECK(single_model_bound(empty, x, p, beta * 2, 3.0) > single_model_bound(empty, x, p, beta, 3.0));
  CHECK(single_model_bound(empty, x, p, beta, 4.0) > single_model_bound(empty, x, p, beta, 3.0));
  auto q = p;
  q.tau = 0.02;
  CHECK(single_model_bound(empty, x, q, beta, 3.0) > single_model_bound(empty, x, p, beta, 3.0));

  KernelParams tight = kernel(1);
  tight.noise_std = 1e-6;
  GpModel at_data(tight, PriorMeanFunction::zero(1), p.domain, Dataset{{{1.0}}, {0.3}});
  at_data.fit();
  CHECK(single_model_bound(at_data, x, p, beta, 3.0) == doctest::Approx(0.03).epsilon(1e-3));

  auto var = p;
  var.sigma_reading = SigmaReading::kVariance;
  GpModel one(kernel(1), PriorMeanFunction::zero(1), p.domain, Dataset{{{1.0}}, {0.3}});
  one.fit();
  const double v = one.posterior_variance(x);
  CHECK(single_model_bound(one, x, var, beta, 3.0) == doctest::Approx(std::sqrt(beta) * v + 0.03));
  CHECK(single_model_bound(one, x, p, beta, 3.0) == doctest::Approx(std::sqrt(beta) * std::sqrt(v) + 0.03));
}

TEST_CASE("aggregated bound is the weighted sum with the aggregation weights") {
  CHECK(aggregated_bound(std::vector<double>{1.0}, std::vector<double>{2.5}) == 2.5);
  CHECK(aggregated_bound(std::vector<double>{0.5, 0.5}, std::vector<double>{1, 3}) == 2.0);
  CHECK_THROWS_AS(aggregated_bound(std::vector<double>{1.0}, std::vector<double>{1, 2}), ContractError);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1), eta(0.1, 5);
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t n = 1 + rng() % 6;
    std::vector<AgentId> ids(n);
    std::vector<double> eps(n), var(n), etas;
    for (std::size_t i = 0; i < n; ++i) {
      ids[i] = i;
      eps[i] = u(rng);
      var[i] = 0.01 + u(rng);
    }
    const auto trust = normalize_neighborhood(ids, eps);
    const auto e = elect(trust, rng() % n, 0);
    std::vector<double> v;
    for (AgentId j : e.elected) {
      v.push_back(var[j]);
      etas.push_back(eta(rng));
    }
    const double c = u(rng);
    const auto w = combine_weights(prior_weights(e, trust, 0.5), variance_weights(e, v), c);
    double direct = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) direct += w[k] * etas[k];
    CHECK(std::abs(aggregated_bound(w, etas) - direct) <= 1e-12);
  }
}

TEST_CASE("overall bound") {
  const auto one = overall_bound(std::vector<double>{2.0}, std::vector<std::size_t>{3}, 0.01);
  CHECK(one.bound == 2.0);
  CHECK(one.probability == doctest::Approx(0.97));
  CHECK(!one.warning);
  CHECK(overall_bound(std::vector<double>{3, 4}, std::vector<std::size_t>{1, 1}, 0.01).bound == 5.0);
  const auto bad = overall_bound(std::vector<double>{1, 1}, std::vector<std::size_t>{5, 6}, 0.1);
  CHECK(bad.probability <= 0.0);
  CHECK(bad.warning);
}
