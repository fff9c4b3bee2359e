#pragma once
// Collaborator election and aggregation weights.

#include <cstddef>
#include <span>
#include <vector>

#include "prigp/trust.hpp"

namespace prigp {

/// How the elected-set size follows from the per-agent count S̄_i.
enum class ElectionRule {
  kThreshold,  // |S_i| = |N̄_i| - S̄_i  (S̄_i agents are discharged)
  kKeepCount,  // |S_i| = S̄_i          (S̄_i agents are kept)
};

/// Input interpretation for the variance-based weight.
enum class VarianceWeighting {
  kInverseVariance,         // h = 1 / var
  kInverseVarianceSquared,  // h = 1 / var^2
};

struct ElectionResult {
  AgentId agent = 0;
  std::vector<AgentId> elected;  // ascending agent id
  double threshold = 0.0;        // eps-bar_i
  std::size_t target = 0;        // required |S_i|
  bool tie_adjusted = false;     // strict-threshold set had to be filled or trimmed
  bool cold_start = false;       // no trust signal yet: self only

  bool contains(AgentId j) const;
};

/// Elect from `trust` (covering the closed neighbourhood of `self`).
///
/// The threshold is the d-th largest normalised error, d = |N̄_i| - target
/// (the largest value when d = 0). Agents strictly below it are elected; if
/// ties make that set differ from `target`, it is filled or trimmed in
/// ascending (eps~, id) order. Throws ConfigError if `sbar` is out of range
/// for the rule.
ElectionResult elect(const NormalizedTrust& trust, std::size_t sbar, AgentId self,
                     ElectionRule rule = ElectionRule::kThreshold);

/// S_i = {self} with no trust history available.
ElectionResult cold_start_election(AgentId self);

/// sigma_h * sqrt(2 pi) / exp(-0.5 ((eps - eps_bar) / sigma_h)^2).
double h_epsilon(double eps_normalized, double eps_bar, double sigma_h);

/// Precision-style weight of a posterior variance. Throws NumericError for var <= 0.
double h_sigma(double variance, VarianceWeighting mode = VarianceWeighting::kInverseVariance);

/// w_j / sum w; uniform when every entry is zero. Throws ContractError on an
/// empty input or a negative / non-finite entry.
std::vector<double> proportional_normalize(std::span<const double> raw);

enum class WeightMode { kPriorOnly, kVarianceOnly, kMixed };

struct WeightVector {
  std::vector<AgentId> agents;  // == election.elected
  std::vector<double> weights;  // parallel to agents, sums to 1
  WeightMode mode = WeightMode::kPriorOnly;
  double c = 1.0;
  double sigma_h = 1.0;

  /// Weight of `j`; 0 for agents outside the elected set.
  double at(AgentId j) const;
};

/// Normalised h_epsilon over the elected set, parallel to election.elected.
/// Evaluated in log space so small sigma_h does not overflow.
std::vector<double> prior_weights(const ElectionResult& election, const NormalizedTrust& trust,
                                  double sigma_h);

/// Normalised h_sigma over the elected set; `variances` parallel to election.elected.
std::vector<double> variance_weights(const ElectionResult& election,
                                     std::span<const double> variances,
                                     VarianceWeighting mode = VarianceWeighting::kInverseVariance);

/// Normalised (w_eps)^c (w_sigma)^(1-c). c == 1 returns `eps_weights`
/// unchanged and never reads `sigma_weights` (which may be empty); c == 0
/// returns `sigma_weights` unchanged.
std::vector<double> combine_weights(std::span<const double> eps_weights,
                                    std::span<const double> sigma_weights, double c);

}  // namespace prigp
