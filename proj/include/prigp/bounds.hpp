#pragma once
// Probabilistic uniform error bounds for a single prior-mean GP and for the
// weighted aggregate of several.

#include <optional>
#include <span>
#include <vector>

#include "prigp/domain.hpp"
#include "prigp/kernel_gp.hpp"

namespace prigp {

/// How sigma(x) enters sqrt(beta) * sigma(x).
enum class SigmaReading {
  kStandardDeviation,  // sqrt(posterior variance)  (default)
  kVariance,           // posterior variance as is
};

struct BoundParams {
  double tau = 0.01;    // grid factor
  double delta = 0.05;  // confidence
  Box domain;
  double L_f = 0.0;     // Lipschitz constant of the true function
  double L_fhat = 0.0;  // ... of the model's prior mean
  std::optional<double> L_kappa;  // kernel; closed form from the model when absent
  SigmaReading sigma_reading = SigmaReading::kStandardDeviation;

  /// Throws ConfigError unless tau > 0, 0 < delta < 1, a valid box and
  /// nonnegative finite Lipschitz constants.
  void validate() const;
};

/// 2 sum_j log(sqrt(m) / (2 tau) * width_j + 1) - 2 log delta.
double beta_constant(const BoundParams& params);

/// 2 L_kappa (1 + N ||K(X)^-1|| sigma_r^2).
double variance_lipschitz(const GpModel& model, double L_kappa);

/// L_f + L_fhat + sqrt(beta L_sigma2 tau) + sqrt(N) L_kappa ||K(X)^-1 (Y - f̂(X))||.
double gamma_constant(const GpModel& model, const BoundParams& params, double beta);

struct BoundConstants {
  double beta = 0.0;
  double L_kappa = 0.0;
  double L_sigma2 = 0.0;
  double gamma = 0.0;
};

BoundConstants bound_constants(const GpModel& model, const BoundParams& params);

/// eta(x) = sqrt(beta) sigma(x) + gamma tau.
double single_model_bound(const GpModel& model, std::span<const double> x,
                          const BoundParams& params, double beta, double gamma);

/// sum_j w_j eta_j with the aggregation weights of the elected set.
double aggregated_bound(std::span<const double> weights, std::span<const double> etas);

struct OverallBound {
  double bound = 0.0;        // ||eta~||_2
  double probability = 0.0;  // 1 - sum_i |S_i| delta
  bool warning = false;      // probability <= 0
};

OverallBound overall_bound(std::span<const double> aggregated_etas,
                           std::span<const std::size_t> elected_sizes, double delta);

}  // namespace prigp
