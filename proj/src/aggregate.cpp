#include "prigp/aggregate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "prigp/csv.hpp"
#include "prigp/error.hpp"

namespace prigp {
namespace {

const GpModel& model_of(std::span<const GpModel> models, AgentId j) {
  if (j >= models.size()) {
    throw ContractError("agent " + std::to_string(j) + " has no model");
  }
  return models[j];
}

void check_neighborhood(AgentId self, std::span<const AgentId> neighborhood) {
  if (std::find(neighborhood.begin(), neighborhood.end(), self) == neighborhood.end()) {
    throw ContractError("closed neighbourhood of agent " + std::to_string(self) +
                        " must contain the agent itself");
  }
}

std::uint64_t remote_count(AgentId self, std::span<const AgentId> queried) {
  std::uint64_t n = 0;
  for (AgentId j : queried) n += (j != self) ? 1 : 0;
  return n;
}

struct Expert {
  double mean;
  double variance;
};

// Mean and variance from every neighbour, with the variance floor check.
std::vector<Expert> query_experts(std::span<const double> x, std::span<const GpModel> models,
                                  std::span<const AgentId> neighborhood, const char* who) {
  std::vector<Expert> out;
  out.reserve(neighborhood.size());
  for (AgentId j : neighborhood) {
    const GpModel& m = model_of(models, j);
    const double mu = m.posterior_mean(x);
    const double var = m.posterior_variance(x);
    if (!(var > kVarianceFloor)) {
      throw NumericError(std::string(who) + ": variance of agent " + std::to_string(j) + " (" +
                         format_double(var) + ") is below the floor");
    }
    out.push_back({mu, var});
  }
  return out;
}

AggregateCounters full_counters(AgentId self, std::span<const AgentId> neighborhood,
                                bool with_variance) {
  AggregateCounters c;
  c.mean_evals = neighborhood.size();
  c.var_evals = with_variance ? neighborhood.size() : 0;
  c.messages = remote_count(self, neighborhood);
  return c;
}

}  // namespace

std::string AggregationMethod::label() const {
  switch (kind) {
    case MethodKind::kPriGp: return "prigp(c=" + format_double(c) + ")";
    case MethodKind::kPoe: return "poe";
    case MethodKind::kGpoe: return "gpoe";
    case MethodKind::kBcm: return "bcm";
    case MethodKind::kRbcm: return "rbcm";
    case MethodKind::kMoe: return "moe";
    case MethodKind::kIgp: return "igp";
  }
  return "?";
}

AggregationMethod parse_method(std::string_view text, double default_c) {
  AggregationMethod m;
  std::string_view name = text;
  std::optional<double> c;
  if (auto at = text.find('@'); at != std::string_view::npos) {
    name = text.substr(0, at);
    const std::string_view num = text.substr(at + 1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
    if (ec != std::errc() || ptr != num.data() + num.size()) {
      throw ConfigError("method '" + std::string(text) + "': malformed c value");
    }
    c = v;
  }
  if (name == "prigp") {
    m.kind = MethodKind::kPriGp;
    m.c = c.value_or(default_c);
    if (!(m.c >= 0.0 && m.c <= 1.0)) {
      throw ConfigError("method '" + std::string(text) + "': c must lie in [0, 1]");
    }
    return m;
  }
  if (c) throw ConfigError("method '" + std::string(text) + "': only prigp takes a c value");
  if (name == "poe") m.kind = MethodKind::kPoe;
  else if (name == "gpoe") m.kind = MethodKind::kGpoe;
  else if (name == "bcm") m.kind = MethodKind::kBcm;
  else if (name == "rbcm") m.kind = MethodKind::kRbcm;
  else if (name == "moe") m.kind = MethodKind::kMoe;
  else if (name == "igp") m.kind = MethodKind::kIgp;
  else throw ConfigError("unknown method '" + std::string(text) +
                         "' (expected prigp, poe, gpoe, bcm, rbcm, moe, igp)");
  return m;
}

AggregateResult prigp_predict(AgentId self, std::span<const double> x,
                              std::span<const GpModel> models,
                              std::span<const AgentId> neighborhood,
                              const NormalizedTrust* trust, const PriGpOptions& options) {
  check_neighborhood(self, neighborhood);
  if (!(options.c >= 0.0 && options.c <= 1.0)) throw ConfigError("prigp: c must lie in [0, 1]");

  AggregateResult r;
  ElectionResult election = trust != nullptr ? elect(*trust, options.sbar, self, options.rule)
                                             : cold_start_election(self);
  for (AgentId j : election.elected) {
    if (std::find(neighborhood.begin(), neighborhood.end(), j) == neighborhood.end()) {
      throw ContractError("prigp: elected agent outside the neighbourhood");
    }
  }

  WeightVector w;
  w.agents = election.elected;
  w.c = options.c;
  w.sigma_h = options.sigma_h;
  std::vector<double> means;
  means.reserve(election.elected.size());
  std::vector<double> variances;
  const bool need_variance = options.c != 1.0;
  for (AgentId j : election.elected) {
    const GpModel& m = model_of(models, j);
    means.push_back(m.posterior_mean(x));
    if (need_variance) variances.push_back(std::max(m.posterior_variance(x), kVarianceFloor));
  }

  if (options.c == 1.0) {
    w.mode = WeightMode::kPriorOnly;
    w.weights = trust != nullptr ? prior_weights(election, *trust, options.sigma_h)
                                 : std::vector<double>{1.0};
  } else if (options.c == 0.0) {
    w.mode = WeightMode::kVarianceOnly;
    w.weights = variance_weights(election, variances, options.variance_weighting);
  } else {
    w.mode = WeightMode::kMixed;
    const std::vector<double> we = trust != nullptr
                                       ? prior_weights(election, *trust, options.sigma_h)
                                       : std::vector<double>{1.0};
    const std::vector<double> ws = variance_weights(election, variances, options.variance_weighting);
    w.weights = combine_weights(we, ws, options.c);
  }

  double value = 0.0;
  for (std::size_t k = 0; k < means.size(); ++k) value += w.weights[k] * means[k];
  r.value = value;
  r.counters.mean_evals = means.size();
  r.counters.var_evals = variances.size();
  r.counters.messages = remote_count(self, election.elected);
  r.election = std::move(election);
  r.weights = std::move(w);
  return r;
}

AggregateResult moe_predict(AgentId self, std::span<const double> x,
                            std::span<const GpModel> models,
                            std::span<const AgentId> neighborhood) {
  check_neighborhood(self, neighborhood);
  double sum = 0.0;
  for (AgentId j : neighborhood) sum += model_of(models, j).posterior_mean(x);
  AggregateResult r;
  r.value = sum / static_cast<double>(neighborhood.size());
  r.counters = full_counters(self, neighborhood, false);
  return r;
}

AggregateResult poe_predict(AgentId self, std::span<const double> x,
                            std::span<const GpModel> models,
                            std::span<const AgentId> neighborhood) {
  check_neighborhood(self, neighborhood);
  const auto experts = query_experts(x, models, neighborhood, "poe");
  double num = 0.0;
  double den = 0.0;
  for (const Expert& e : experts) {
    num += e.mean / e.variance;
    den += 1.0 / e.variance;
  }
  AggregateResult r;
  r.value = num / den;
  r.counters = full_counters(self, neighborhood, true);
  return r;
}

AggregateResult gpoe_predict(AgentId self, std::span<const double> x,
                             std::span<const GpModel> models,
                             std::span<const AgentId> neighborhood) {
  check_neighborhood(self, neighborhood);
  const auto experts = query_experts(x, models, neighborhood, "gpoe");
  const double beta = 1.0 / static_cast<double>(experts.size());
  double num = 0.0;
  double precision = 0.0;
  for (const Expert& e : experts) {
    num += beta * e.mean / e.variance;
    precision += beta / e.variance;
  }
  AggregateResult r;
  r.value = num / precision;
  r.counters = full_counters(self, neighborhood, true);
  return r;
}

AggregateResult bcm_predict(AgentId self, std::span<const double> x,
                            std::span<const GpModel> models,
                            std::span<const AgentId> neighborhood) {
  check_neighborhood(self, neighborhood);
  const GpModel& own = model_of(models, self);
  const auto experts = query_experts(x, models, neighborhood, "bcm");
  const double prior_var = own.prior_variance() + own.params().noise_variance();
  const double prior_mean = own.prior_mean(x);
  const double extra = static_cast<double>(experts.size()) - 1.0;
  double precision = -extra / prior_var;
  double num = -extra / prior_var * prior_mean;
  for (const Expert& e : experts) {
    precision += 1.0 / e.variance;
    num += e.mean / e.variance;
  }
  if (!(precision > kVarianceFloor)) {
    throw NumericError("bcm: nonpositive precision " + format_double(precision) + " for agent " +
                       std::to_string(self) + " (M=" + std::to_string(experts.size()) +
                       ", prior variance " + format_double(prior_var) + ")");
  }
  AggregateResult r;
  r.value = num / precision;
  r.counters = full_counters(self, neighborhood, true);
  return r;
}

AggregateResult rbcm_predict(AgentId self, std::span<const double> x,
                             std::span<const GpModel> models,
                             std::span<const AgentId> neighborhood) {
  check_neighborhood(self, neighborhood);
  const GpModel& own = model_of(models, self);
  const auto experts = query_experts(x, models, neighborhood, "rbcm");
  const double prior_var = own.prior_variance() + own.params().noise_variance();
  const double prior_mean = own.prior_mean(x);
  double beta_sum = 0.0;
  double precision = 0.0;
  double num = 0.0;
  for (const Expert& e : experts) {
    const double beta = 0.5 * (std::log(prior_var) - std::log(e.variance));
    beta_sum += beta;
    precision += beta / e.variance;
    num += beta * e.mean / e.variance;
  }
  precision += (1.0 - beta_sum) / prior_var;
  num += (1.0 - beta_sum) / prior_var * prior_mean;
  if (!(precision > kVarianceFloor)) {
    throw NumericError("rbcm: nonpositive precision " + format_double(precision) +
                       " for agent " + std::to_string(self));
  }
  AggregateResult r;
  r.value = num / precision;
  r.counters = full_counters(self, neighborhood, true);
  return r;
}

AggregateResult igp_predict(AgentId self, std::span<const double> x,
                            std::span<const GpModel> models) {
  AggregateResult r;
  r.value = model_of(models, self).posterior_mean(x);
  r.counters.mean_evals = 1;
  return r;
}

AggregateResult aggregate(const AggregationMethod& method, AgentId self,
                          std::span<const double> x, std::span<const GpModel> models,
                          std::span<const AgentId> neighborhood, const NormalizedTrust* trust,
                          const PriGpOptions& options) {
  switch (method.kind) {
    case MethodKind::kPriGp: {
      PriGpOptions o = options;
      o.c = method.c;
      return prigp_predict(self, x, models, neighborhood, trust, o);
    }
    case MethodKind::kPoe: return poe_predict(self, x, models, neighborhood);
    case MethodKind::kGpoe: return gpoe_predict(self, x, models, neighborhood);
    case MethodKind::kBcm: return bcm_predict(self, x, models, neighborhood);
    case MethodKind::kRbcm: return rbcm_predict(self, x, models, neighborhood);
    case MethodKind::kMoe: return moe_predict(self, x, models, neighborhood);
    case MethodKind::kIgp: return igp_predict(self, x, models);
  }
  throw ContractError("aggregate: unknown method");
}

}  // namespace prigp
