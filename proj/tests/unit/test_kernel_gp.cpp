#include <doctest.h>

#include <cmath>
#include <random>

#include "prigp/kernel_gp.hpp"
#include "prigp/simd/kernel_row.hpp"

using namespace prigp;

namespace {

KernelParams unit_kernel(std::size_t m, double l = 1.0, double noise = 0.1) {
  KernelParams p;
  p.signal_std = 1.0;
  p.inverse_lengthscales.assign(m, l);
  p.noise_std = noise;
  return p;
}

Box unit_box(std::size_t m) { return {std::vector<double>(m, 0.0), std::vector<double>(m, 1.0)}; }

GpModel random_model(std::mt19937_64& rng, std::size_t n, std::size_t m, const char* prior = "0") {
  std::uniform_real_distribution<double> u(0.0, 1.0), y(-2.0, 2.0), l(0.5, 6.0), s(0.5, 2.0), nz(0.05, 0.5);
  KernelParams p;
  p.signal_std = s(rng);
  for (std::size_t j = 0; j < m; ++j) p.inverse_lengthscales.push_back(l(rng));
  p.noise_std = nz(rng);
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(m);
    for (auto& v : x) v = u(rng);
    d.inputs.push_back(x);
    d.outputs.push_back(y(rng));
  }
  GpModel g(p, PriorMeanFunction(prior, m), unit_box(m), d);
  g.fit();
  return g;
}

}  // namespace

TEST_CASE("kernel evaluation follows the multiplying convention") {
  const auto p = unit_kernel(1);
  CHECK(kernel_eval(std::vector<double>{0.0}, std::vector<double>{0.2}, p) ==
        doctest::Approx(std::exp(-0.02)).epsilon(1e-15));
  const auto q = KernelParams::from_lengthscales(1.0, std::vector<double>{0.2}, 0.1);
  CHECK(q.inverse_lengthscales[0] == doctest::Approx(5.0));
  CHECK(kernel_eval(std::vector<double>{0.0}, std::vector<double>{0.2}, q) ==
        doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  auto p3 = unit_kernel(3, 2.0);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> a{u(rng), u(rng), u(rng)}, b{u(rng), u(rng), u(rng)};
    CHECK(kernel_eval(a, b, p3) == kernel_eval(b, a, p3));
    CHECK(kernel_eval(a, a, p3) == 1.0);
  }
  CHECK_THROWS_AS(kernel_eval(std::vector<double>{0.0}, std::vector<double>{0.0, 1.0}, p), InputError);
  CHECK(kernel_lipschitz(unit_kernel(2, 3.0)) == doctest::Approx(3.0 * std::exp(-0.5)));
}

TEST_CASE("gram matrix is symmetric with the noise on the diagonal") {
  std::mt19937_64 rng(2);
  const GpModel g = random_model(rng, 12, 2);
  const Eigen::MatrixXd k = gram_matrix(g.data(), g.params());
  CHECK((k - k.transpose()).cwiseAbs().maxCoeff() == 0.0);
  for (Eigen::Index i = 0; i < k.rows(); ++i) {
    CHECK(k(i, i) == g.params().signal_variance() + g.params().noise_variance());
  }
  CHECK(k(0, 1) == doctest::Approx(kernel_eval(g.data().inputs[0], g.data().inputs[1], g.params())).epsilon(1e-14));
}

TEST_CASE("one training point, hand-derived posterior") {
  Dataset d{{{0.5}}, {2.0}};
  GpModel g(unit_kernel(1), PriorMeanFunction::zero(1), unit_box(1), d);
  g.fit();
  const std::vector<double> x0{0.5};
  CHECK(g.posterior_mean(x0) == doctest::Approx(2.0 / 1.01).epsilon(1e-14));
  CHECK(g.posterior_variance(x0) == doctest::Approx(1.0 - 1.0 / 1.01).epsilon(1e-12));
  CHECK(g.inverse_gram_norm() == doctest::Approx(1.0 / 1.01).epsilon(1e-14));
  // With a prior the residual is corrected, not the raw output.
  GpModel h(unit_kernel(1), PriorMeanFunction("1", 1), unit_box(1), d);
  h.fit();
  CHECK(h.posterior_mean(x0) == doctest::Approx(1.0 + 1.0 / 1.01).epsilon(1e-14));
}

TEST_CASE("empty model returns the prior") {
  GpModel g(unit_kernel(2), PriorMeanFunction("x + y", 2), unit_box(2));
  g.fit();
  CHECK(g.posterior_mean(std::vector<double>{0.25, 0.5}) == 0.75);
  CHECK(g.posterior_variance(std::vector<double>{0.25, 0.5}) == 1.0);
  CHECK(g.inverse_gram_norm() == 0.0);
}

TEST_CASE("factor reconstructs the Gram matrix") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const GpModel g = random_model(rng, 1 + rng() % 20, 1 + rng() % 3);
    const Eigen::MatrixXd& l = g.factor();
    const Eigen::MatrixXd k = gram_matrix(g.data(), g.params());
    CHECK((l * l.transpose() - k).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(g.jitter() == 0.0);
  }
}

TEST_CASE("prior shift: adding a constant to prior and data shifts the mean") {
  std::mt19937_64 rng(4);
  GpModel a = random_model(rng, 10, 2, "0");
  Dataset shifted = a.data();
  for (double& y : shifted.outputs) y += 3.0;
  GpModel b(a.params(), PriorMeanFunction("3", 2), a.domain(), shifted);
  b.fit();
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 50; ++k) {
    const std::vector<double> x{u(rng), u(rng)};
    CHECK(b.posterior_mean(x) == doctest::Approx(a.posterior_mean(x) + 3.0).epsilon(1e-12));
    CHECK(b.posterior_variance(x) == doctest::Approx(a.posterior_variance(x)).epsilon(1e-12));
  }
}

TEST_CASE("interpolation: tiny noise reproduces the training outputs") {
  Dataset d{{{0.1}, {0.5}, {0.9}}, {1.0, -1.0, 0.5}};
  GpModel g(unit_kernel(1, 5.0, 1e-4), PriorMeanFunction::zero(1), unit_box(1), d);
  g.fit();
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(g.posterior_mean(d.inputs[i]) == doctest::Approx(d.outputs[i]).epsilon(1e-5));
    CHECK(g.posterior_variance(d.inputs[i]) < 1e-6);
  }
}

TEST_CASE("jitter escalates for a numerically singular Gram matrix") {
  // Duplicate inputs and a noise level that vanishes against sigma_r^2.
  Dataset d{{{0.3}, {0.3}, {0.3}}, {1.0, 1.0, 1.0}};
  GpModel g(unit_kernel(1, 1.0, 1e-12), PriorMeanFunction::zero(1), unit_box(1), d);
  g.fit();
  CHECK(g.jitter() > 0.0);
  CHECK(g.jitter() <= 1e-7);
  CHECK(std::isfinite(g.posterior_mean(std::vector<double>{0.3})));
}

TEST_CASE("variance stays in [0, sigma_r^2] on fuzzed models") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.2, 1.2);
  int cases = 0;
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t m = 1 + rng() % 3;
    const GpModel g = random_model(rng, rng() % 25, m);
    for (int k = 0; k < 20; ++k) {
      std::vector<double> x(m);
      for (auto& v : x) v = u(rng);
      const double var = g.posterior_variance(x);
      CHECK(var >= 0.0);
      CHECK(var <= g.prior_variance());
      ++cases;
    }
  }
  CHECK(cases >= 1000);
}

TEST_CASE("stale models refuse to predict; counters count") {
  Dataset d{{{0.5}}, {1.0}};
  GpModel g(unit_kernel(1), PriorMeanFunction::zero(1), unit_box(1), d);
  CHECK_THROWS_AS(g.posterior_mean(std::vector<double>{0.5}), ContractError);
  g.fit();
  g.posterior_mean(std::vector<double>{0.5});
  g.predict(std::vector<double>{0.4}, false);
  CHECK(g.mean_calls() == 2);
  CHECK(g.variance_calls() == 0);
  g.predict(std::vector<double>{0.4}, true);
  CHECK(g.variance_calls() == 1);
  g.append_observation(std::vector<double>{0.7}, 0.0);
  CHECK_THROWS_AS(g.posterior_variance(std::vector<double>{0.5}), ContractError);
  g.fit();
  CHECK(g.size() == 2);
  CHECK_THROWS_AS(g.append_observation(std::vector<double>{1.5}, 0.0), InputError);
  CHECK_THROWS_AS(g.append_observation(std::vector<double>{0.5}, NAN), InputError);
}

TEST_CASE("construction validates data and parameters") {
  Dataset outside{{{2.0}}, {1.0}};
  CHECK_THROWS_AS(GpModel(unit_kernel(1), PriorMeanFunction::zero(1), unit_box(1), outside), InputError);
  Dataset ragged{{{0.5}}, {1.0, 2.0}};
  CHECK_THROWS_AS(GpModel(unit_kernel(1), PriorMeanFunction::zero(1), unit_box(1), ragged), InputError);
  CHECK_THROWS_AS(GpModel(unit_kernel(2), PriorMeanFunction::zero(1), unit_box(1)), InputError);
  auto bad = unit_kernel(1);
  bad.noise_std = 0.0;
  CHECK_THROWS_AS(GpModel(bad, PriorMeanFunction::zero(1), unit_box(1)), InputError);
}

TEST_CASE("dispatch does not change predictions beyond round-off") {
  std::mt19937_64 rng(6);
  const GpModel g = random_model(rng, 30, 3);
  std::uniform_real_distribution<double> u(0, 1);
  const simd::Isa before = simd::active_isa();
  for (int k = 0; k < 50; ++k) {
    const std::vector<double> x{u(rng), u(rng), u(rng)};
    simd::set_active_isa(simd::Isa::kScalar);
    const double ms = g.posterior_mean(x), vs = g.posterior_variance(x);
    simd::set_active_isa(simd::detect_isa());
    CHECK(g.posterior_mean(x) == doctest::Approx(ms).epsilon(1e-12));
    CHECK(g.posterior_variance(x) == doctest::Approx(vs).epsilon(1e-10));
  }
  simd::set_active_isa(before);
}
