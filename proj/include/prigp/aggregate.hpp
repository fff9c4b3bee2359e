#pragma once
// Fusing neighbour predictions into one estimate: the elective prior-aware
// scheme and the standard baselines (PoE, gPoE, BCM, rBCM, MoE, individual GP).
//
// Every function reads only the models listed in `neighborhood` (the closed
// neighbourhood of the aggregating agent, which must contain it). Models are
// indexed by agent id.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "prigp/elective.hpp"
#include "prigp/kernel_gp.hpp"

namespace prigp {

enum class MethodKind { kPriGp, kPoe, kGpoe, kBcm, kRbcm, kMoe, kIgp };

struct AggregationMethod {
  MethodKind kind = MethodKind::kPriGp;
  double c = 1.0;  // PriGp only

  /// "prigp(c=1)", "poe", ...
  std::string label() const;
};

/// Parses "prigp", "prigp@0.5", "poe", "gpoe", "bcm", "rbcm", "moe", "igp".
/// A bare "prigp" takes `default_c`.
AggregationMethod parse_method(std::string_view text, double default_c = 1.0);

struct AggregateCounters {
  std::uint64_t mean_evals = 0;
  std::uint64_t var_evals = 0;
  std::uint64_t messages = 0;  // distinct remote agents queried
};

struct AggregateResult {
  double value = 0.0;
  std::optional<ElectionResult> election;  // PriGp only
  std::optional<WeightVector> weights;     // PriGp only
  AggregateCounters counters;
};

struct PriGpOptions {
  std::size_t sbar = 0;
  double c = 1.0;
  double sigma_h = 1.0;
  ElectionRule rule = ElectionRule::kThreshold;
  VarianceWeighting variance_weighting = VarianceWeighting::kInverseVariance;
};

/// Variances below this are floored before entering h_sigma.
inline constexpr double kVarianceFloor = 1e-12;

/// Elect, weigh and fuse. `trust` == nullptr selects the cold-start rule
/// (self only). Posterior variances are requested only when c != 1.
AggregateResult prigp_predict(AgentId self, std::span<const double> x,
                              std::span<const GpModel> models,
                              std::span<const AgentId> neighborhood,
                              const NormalizedTrust* trust, const PriGpOptions& options);

/// Uniform average of neighbour means.
AggregateResult moe_predict(AgentId self, std::span<const double> x,
                            std::span<const GpModel> models,
                            std::span<const AgentId> neighborhood);

/// Precision-weighted mean, weights 1 / var_j.
AggregateResult poe_predict(AgentId self, std::span<const double> x,
                            std::span<const GpModel> models,
                            std::span<const AgentId> neighborhood);

/// Generalised PoE with uniform beta_j = 1/M.
AggregateResult gpoe_predict(AgentId self, std::span<const double> x,
                             std::span<const GpModel> models,
                             std::span<const AgentId> neighborhood);

/// Bayesian committee machine. The prior correction uses the aggregating
/// agent's own prior mean and prior variance k(x,x) + sigma_n^2.
AggregateResult bcm_predict(AgentId self, std::span<const double> x,
                            std::span<const GpModel> models,
                            std::span<const AgentId> neighborhood);

/// Robust BCM with beta_j = 0.5 (ln var_* - ln var_j).
AggregateResult rbcm_predict(AgentId self, std::span<const double> x,
                             std::span<const GpModel> models,
                             std::span<const AgentId> neighborhood);

/// The agent's own posterior mean; no messages.
AggregateResult igp_predict(AgentId self, std::span<const double> x,
                            std::span<const GpModel> models);

/// Dispatch on `method`. `options.c` is overridden by `method.c`.
AggregateResult aggregate(const AggregationMethod& method, AgentId self,
                          std::span<const double> x, std::span<const GpModel> models,
                          std::span<const AgentId> neighborhood, const NormalizedTrust* trust,
                          const PriGpOptions& options);

}  // namespace prigp
