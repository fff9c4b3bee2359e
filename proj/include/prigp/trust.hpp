#pragma once
// Prior-error bookkeeping: how far each agent's prior mean has been from the
// measurements seen so far, and the neighbourhood min-max normalisation used
// to rank agents by that record.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "prigp/kernel_gp.hpp"

namespace prigp {

using AgentId = std::size_t;

struct PriorErrorRecord {
  double t = 0.0;
  std::vector<double> x;
  double error = 0.0;  // signed: prior - measurement
};

class PriorErrorLog {
 public:
  explicit PriorErrorLog(AgentId agent = 0, bool retain_history = false)
      : agent_(agent), retain_(retain_history) {}

  /// Record e = prior_value - measurement. Throws InputError on non-finite input.
  /// Returns the signed error.
  double record(double prior_value, double measurement, double t = 0.0,
                std::span<const double> x = {});

  /// Mean of |e| over everything recorded so far; nullopt before the first record.
  std::optional<double> accumulated() const;

  AgentId agent() const { return agent_; }
  std::uint64_t count() const { return count_; }
  double sum_abs() const { return sum_abs_; }
  const std::vector<PriorErrorRecord>& history() const { return history_; }

 private:
  AgentId agent_;
  bool retain_;
  std::uint64_t count_ = 0;
  double sum_abs_ = 0.0;
  std::vector<PriorErrorRecord> history_;
};

/// Min-max normalised accumulated errors over a closed neighbourhood.
struct NormalizedTrust {
  std::vector<AgentId> agents;   // neighbourhood members, in the order given
  std::vector<double> values;    // eps~_j in [0, 1], parallel to `agents`
  double eps_min = 0.0;
  double eps_max = 0.0;

  /// Throws ContractError if `agent` is not in the neighbourhood.
  double at(AgentId agent) const;
  std::size_t size() const { return agents.size(); }
};

/// eps~_j = (eps_j - min) / (max - min); all zeros when max == min.
NormalizedTrust normalize_neighborhood(std::span<const AgentId> agents,
                                       std::span<const double> accumulated);

/// Both sides of the identity Y - f̂(X) = G (Y - mu(X)), G = I + sigma_n^-2 K(X, X).
struct ResidualIdentityReport {
  double max_abs_deviation = 0.0;
  double eps_prior_path = 0.0;     // (1/N) 1^T |Y - f̂(X)|
  double eps_identity_path = 0.0;  // (1/N) 1^T |G (Y - mu(X))|
  Eigen::VectorXd prior_residual;
  Eigen::VectorXd transformed_posterior_residual;
};

/// Evaluates both sides independently: the left from the data and the prior,
/// the right from posterior means at every training input and an explicitly
/// assembled G that includes the fit's jitter.
ResidualIdentityReport residual_identity_oracle(const GpModel& model);

}  // namespace prigp
