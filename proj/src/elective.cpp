#include "prigp/elective.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "prigp/error.hpp"

namespace prigp {

bool ElectionResult::contains(AgentId j) const {
  return std::binary_search(elected.begin(), elected.end(), j);
}

ElectionResult cold_start_election(AgentId self) {
  ElectionResult r;
  r.agent = self;
  r.elected = {self};
  r.target = 1;
  r.cold_start = true;
  return r;
}

ElectionResult elect(const NormalizedTrust& trust, std::size_t sbar, AgentId self,
                     ElectionRule rule) {
  const std::size_t size = trust.size();
  if (size == 0) throw ContractError("elect: empty neighbourhood");
  std::size_t target = 0;
  if (rule == ElectionRule::kThreshold) {
    if (sbar > size - 1) {
      throw ConfigError("elect: S-bar " + std::to_string(sbar) + " out of range [0, " +
                        std::to_string(size - 1) + "] for agent " + std::to_string(self));
    }
    target = size - sbar;
  } else {
    if (sbar < 1 || sbar > size) {
      throw ConfigError("elect: keep-count " + std::to_string(sbar) + " out of range [1, " +
                        std::to_string(size) + "] for agent " + std::to_string(self));
    }
    target = sbar;
  }

  std::vector<double> sorted_desc = trust.values;
  std::sort(sorted_desc.begin(), sorted_desc.end(), std::greater<>());
  const std::size_t discarded = size - target;
  ElectionResult r;
  r.agent = self;
  r.target = target;
  r.threshold = sorted_desc[discarded == 0 ? 0 : discarded - 1];

  std::vector<std::size_t> strict;
  for (std::size_t k = 0; k < size; ++k) {
    if (trust.values[k] < r.threshold) strict.push_back(k);
  }

  if (strict.size() == target) {
    for (std::size_t k : strict) r.elected.push_back(trust.agents[k]);
  } else {
    r.tie_adjusted = true;
    std::vector<std::size_t> order(size);
    for (std::size_t k = 0; k < size; ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (trust.values[a] != trust.values[b]) return trust.values[a] < trust.values[b];
      return trust.agents[a] < trust.agents[b];
    });
    for (std::size_t k = 0; k < target; ++k) r.elected.push_back(trust.agents[order[k]]);
  }
  std::sort(r.elected.begin(), r.elected.end());
  return r;
}

double h_epsilon(double eps_normalized, double eps_bar, double sigma_h) {
  if (!(sigma_h > 0.0)) throw ConfigError("h_epsilon: sigma_h must be positive");
  const double z = (eps_normalized - eps_bar) / sigma_h;
  return sigma_h * std::sqrt(2.0 * std::numbers::pi) / std::exp(-0.5 * z * z);
}

double h_sigma(double variance, VarianceWeighting mode) {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw NumericError("h_sigma: variance must be positive and finite");
  }
  return mode == VarianceWeighting::kInverseVariance ? 1.0 / variance
                                                     : 1.0 / (variance * variance);
}

std::vector<double> proportional_normalize(std::span<const double> raw) {
  if (raw.empty()) throw ContractError("proportional_normalize: empty input");
  double total = 0.0;
  for (double w : raw) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ContractError("proportional_normalize: entries must be finite and nonnegative");
    }
    total += w;
  }
  std::vector<double> out(raw.size());
  if (total == 0.0) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(raw.size()));
    return out;
  }
  for (std::size_t k = 0; k < raw.size(); ++k) out[k] = raw[k] / total;
  return out;
}

double WeightVector::at(AgentId j) const {
  for (std::size_t k = 0; k < agents.size(); ++k) {
    if (agents[k] == j) return weights[k];
  }
  return 0.0;
}

std::vector<double> prior_weights(const ElectionResult& election, const NormalizedTrust& trust,
                                  double sigma_h) {
  if (!(sigma_h > 0.0)) throw ConfigError("prior_weights: sigma_h must be positive");
  if (election.elected.empty()) throw ContractError("prior_weights: empty election");
  if (election.cold_start) return {1.0};
  // log h = log(sigma_h sqrt(2 pi)) + z^2 / 2; the constant cancels in the ratio.
  std::vector<double> logs;
  logs.reserve(election.elected.size());
  for (AgentId j : election.elected) {
    const double z = (trust.at(j) - election.threshold) / sigma_h;
    logs.push_back(0.5 * z * z);
  }
  const double top = *std::max_element(logs.begin(), logs.end());
  std::vector<double> raw;
  raw.reserve(logs.size());
  for (double l : logs) raw.push_back(std::exp(l - top));
  return proportional_normalize(raw);
}

std::vector<double> variance_weights(const ElectionResult& election,
                                     std::span<const double> variances, VarianceWeighting mode) {
  if (variances.size() != election.elected.size()) {
    throw ContractError("variance_weights: need one variance per elected agent (" +
                        std::to_string(election.elected.size()) + "), got " +
                        std::to_string(variances.size()));
  }
  std::vector<double> raw;
  raw.reserve(variances.size());
  for (double v : variances) raw.push_back(h_sigma(v, mode));
  return proportional_normalize(raw);
}

std::vector<double> combine_weights(std::span<const double> eps_weights,
                                    std::span<const double> sigma_weights, double c) {
  if (!(c >= 0.0 && c <= 1.0)) throw ConfigError("combine_weights: c must lie in [0, 1]");
  if (c == 1.0) return {eps_weights.begin(), eps_weights.end()};
  if (c == 0.0) return {sigma_weights.begin(), sigma_weights.end()};
  if (eps_weights.size() != sigma_weights.size()) {
    throw ContractError("combine_weights: weight maps cover different agents");
  }
  std::vector<double> raw(eps_weights.size());
  for (std::size_t k = 0; k < raw.size(); ++k) {
    raw[k] = std::pow(eps_weights[k], c) * std::pow(sigma_weights[k], 1.0 - c);
  }
  return proportional_normalize(raw);
}

}  // namespace prigp
