#include "prigp/trust.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "prigp/error.hpp"

namespace prigp {

double PriorErrorLog::record(double prior_value, double measurement, double t,
                             std::span<const double> x) {
  if (!std::isfinite(prior_value) || !std::isfinite(measurement)) {
    throw InputError("prior error: non-finite prior value or measurement");
  }
  const double e = prior_value - measurement;
  ++count_;
  sum_abs_ += std::abs(e);
  if (retain_) history_.push_back({t, std::vector<double>(x.begin(), x.end()), e});
  return e;
}

std::optional<double> PriorErrorLog::accumulated() const {
  if (count_ == 0) return std::nullopt;
  return sum_abs_ / static_cast<double>(count_);
}

double NormalizedTrust::at(AgentId agent) const {
  for (std::size_t k = 0; k < agents.size(); ++k) {
    if (agents[k] == agent) return values[k];
  }
  throw ContractError("agent " + std::to_string(agent) + " is not in this neighbourhood");
}

NormalizedTrust normalize_neighborhood(std::span<const AgentId> agents,
                                       std::span<const double> accumulated) {
  if (agents.empty() || agents.size() != accumulated.size()) {
    throw ContractError("normalize_neighborhood: need one value per agent and at least one agent");
  }
  NormalizedTrust out;
  out.agents.assign(agents.begin(), agents.end());
  for (double v : accumulated) {
    if (!std::isfinite(v)) throw InputError("normalize_neighborhood: non-finite value");
  }
  const auto [lo, hi] = std::minmax_element(accumulated.begin(), accumulated.end());
  out.eps_min = *lo;
  out.eps_max = *hi;
  const double range = out.eps_max - out.eps_min;
  out.values.reserve(accumulated.size());
  for (double v : accumulated) {
    out.values.push_back(range > 0.0 ? std::clamp((v - out.eps_min) / range, 0.0, 1.0) : 0.0);
  }
  return out;
}

ResidualIdentityReport residual_identity_oracle(const GpModel& model) {
  if (!model.fresh()) throw ContractError("residual_identity_oracle: model not fitted");
  const Dataset& data = model.data();
  const std::size_t n = data.size();
  if (n == 0) throw ContractError("residual_identity_oracle: needs at least one training point");
  const KernelParams& kp = model.params();
  const auto ni = static_cast<Eigen::Index>(n);

  // G = I + sigma_n^-2 (K(X, X) + jitter I), assembled entry by entry.
  const double inv_noise = 1.0 / kp.noise_variance();
  Eigen::MatrixXd g(ni, ni);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      g(a, b) = inv_noise * kernel_eval(data.inputs[a], data.inputs[b], kp);
    }
    g(a, a) += 1.0 + inv_noise * model.jitter();
  }

  ResidualIdentityReport r;
  r.prior_residual.resize(ni);
  Eigen::VectorXd posterior_residual(ni);
  for (std::size_t p = 0; p < n; ++p) {
    r.prior_residual(p) = data.outputs[p] - model.prior_mean(data.inputs[p]);
    posterior_residual(p) = data.outputs[p] - model.posterior_mean(data.inputs[p]);
  }
  r.transformed_posterior_residual = g * posterior_residual;
  r.max_abs_deviation = (r.prior_residual - r.transformed_posterior_residual).cwiseAbs().maxCoeff();
  r.eps_prior_path = r.prior_residual.cwiseAbs().sum() / static_cast<double>(n);
  r.eps_identity_path = r.transformed_posterior_residual.cwiseAbs().sum() / static_cast<double>(n);
  return r;
}

}  // namespace prigp
