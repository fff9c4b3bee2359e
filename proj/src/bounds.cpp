#include "prigp/bounds.hpp"

#include <cmath>
#include <string>

#include "prigp/error.hpp"

namespace prigp {

void BoundParams::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("bounds: tau must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("bounds: delta must lie in (0, 1)");
  domain.validate();
  auto check = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ConfigError(std::string("bounds: ") + name + " must be finite and nonnegative");
    }
  };
  check(L_f, "L_f");
  check(L_fhat, "L_fhat");
  if (L_kappa) check(*L_kappa, "L_kappa");
}

double beta_constant(const BoundParams& params) {
  params.validate();
  const std::size_t m = params.domain.dim();
  const double scale = std::sqrt(static_cast<double>(m)) / (2.0 * params.tau);
  double sum = 0.0;
  for (std::size_t j = 0; j < m; ++j) sum += std::log(scale * params.domain.width(j) + 1.0);
  return 2.0 * sum - 2.0 * std::log(params.delta);
}

double variance_lipschitz(const GpModel& model, double L_kappa) {
  if (!model.fresh()) throw ContractError("variance_lipschitz: model is not fitted");
  const double n = static_cast<double>(model.size());
  const double second = n == 0.0 ? 0.0 : n * model.inverse_gram_norm() * model.prior_variance();
  return 2.0 * L_kappa * (1.0 + second);
}

BoundConstants bound_constants(const GpModel& model, const BoundParams& params) {
  BoundConstants c;
  c.beta = beta_constant(params);
  c.L_kappa = params.L_kappa.value_or(kernel_lipschitz(model.params()));
  c.L_sigma2 = variance_lipschitz(model, c.L_kappa);
  c.gamma = gamma_constant(model, params, c.beta);
  return c;
}

double gamma_constant(const GpModel& model, const BoundParams& params, double beta) {
  const double L_kappa = params.L_kappa.value_or(kernel_lipschitz(model.params()));
  const double L_sigma2 = variance_lipschitz(model, L_kappa);
  double residual_term = 0.0;
  if (model.size() > 0) {
    residual_term = std::sqrt(static_cast<double>(model.size())) * L_kappa * model.weights().norm();
  }
  return params.L_f + params.L_fhat + std::sqrt(beta * L_sigma2 * params.tau) + residual_term;
}

double single_model_bound(const GpModel& model, std::span<const double> x,
                          const BoundParams& params, double beta, double gamma) {
  const double var = model.posterior_variance(x);
  const double sigma = params.sigma_reading == SigmaReading::kStandardDeviation ? std::sqrt(var) : var;
  return std::sqrt(beta) * sigma + gamma * params.tau;
}

double aggregated_bound(std::span<const double> weights, std::span<const double> etas) {
  if (weights.size() != etas.size() || weights.empty()) {
    throw ContractError("aggregated_bound: weights and bounds must be nonempty and parallel");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) sum += weights[k] * etas[k];
  return sum;
}

OverallBound overall_bound(std::span<const double> aggregated_etas,
                           std::span<const std::size_t> elected_sizes, double delta) {
  if (aggregated_etas.size() != elected_sizes.size()) {
    throw ContractError("overall_bound: one elected-set size per agent required");
  }
  OverallBound r;
  double sq = 0.0;
  for (double e : aggregated_etas) sq += e * e;
  r.bound = std::sqrt(sq);
  double total = 0.0;
  for (std::size_t s : elected_sizes) total += static_cast<double>(s);
  r.probability = 1.0 - total * delta;
  r.warning = r.probability <= 0.0;
  return r;
}

}  // namespace prigp
