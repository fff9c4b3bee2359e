#include "prigp/mas_sim.hpp"

#include <cmath>
#include <cstdlib>
#include <map>
#include <string>
#include <tuple>

#include "prigp/error.hpp"

namespace prigp {

std::vector<AgentId> CommGraph::neighbors(AgentId i) const {
  std::vector<AgentId> out;
  for (AgentId j : closed_.at(i)) {
    if (j != i) out.push_back(j);
  }
  return out;
}

CommGraph build_graph(const std::vector<std::vector<int>>& adjacency) {
  const std::size_t n = adjacency.size();
  if (n == 0) throw ConfigError("graph: adjacency matrix is empty");
  for (std::size_t i = 0; i < n; ++i) {
    if (adjacency[i].size() != n) {
      throw ConfigError("graph: row " + std::to_string(i + 1) + " has " +
                        std::to_string(adjacency[i].size()) + " entries, expected " +
                        std::to_string(n));
    }
  }
  CommGraph g;
  g.closed_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (adjacency[i][i] != 1) {
      throw ConfigError("graph: diagonal entry " + std::to_string(i + 1) + " must be 1");
    }
    for (std::size_t j = 0; j < n; ++j) {
      const int a = adjacency[i][j];
      if (a != 0 && a != 1) throw ConfigError("graph: entries must be 0 or 1");
      if (a != adjacency[j][i]) {
        throw ConfigError("graph: adjacency is not symmetric at (" + std::to_string(i + 1) + ", " +
                          std::to_string(j + 1) + ")");
      }
      if (a == 1) g.closed_[i].push_back(j);
    }
  }
  g.adjacency_ = adjacency;
  return g;
}

std::array<double, 3> dynamics_rhs(std::span<const double> chi, double s, double r,
                                   const ScalarField& f) {
  if (chi.size() != 3) throw InputError("dynamics_rhs: state must be 3-dimensional");
  const double x = chi[0], y = chi[1], z = chi[2];
  return {s * (y - x), r * x - y - x * z, x * y + f(chi)};
}

std::vector<double> euler_step(std::span<const double> chi, std::span<const double> rhs,
                               double dt, std::size_t step) {
  if (!(dt > 0.0)) throw InputError("euler_step: dt must be positive");
  if (chi.size() != rhs.size()) throw InputError("euler_step: dimension mismatch");
  std::vector<double> next(chi.size());
  for (std::size_t j = 0; j < chi.size(); ++j) {
    next[j] = chi[j] + dt * rhs[j];
    if (!std::isfinite(next[j])) {
      throw NumericError("simulation diverged at step " + std::to_string(step));
    }
  }
  return next;
}

std::vector<std::vector<double>> integrate(const LorenzSystem& system,
                                           std::span<const double> initial, const ScalarField& f) {
  std::vector<std::vector<double>> states;
  states.reserve(system.steps + 1);
  states.emplace_back(initial.begin(), initial.end());
  for (std::size_t k = 0; k < system.steps; ++k) {
    const auto rhs = dynamics_rhs(states.back(), system.s, system.r, f);
    states.push_back(euler_step(states.back(), rhs, system.dt, k + 1));
  }
  return states;
}

namespace {

// Trust over the closed neighbourhood, or nullopt if any member has no history.
std::optional<NormalizedTrust> neighbourhood_trust(std::span<const AgentId> closed,
                                                   const std::vector<PriorErrorLog>& logs) {
  std::vector<double> eps;
  eps.reserve(closed.size());
  for (AgentId j : closed) {
    const auto a = logs[j].accumulated();
    if (!a) return std::nullopt;
    eps.push_back(*a);
  }
  return normalize_neighborhood(closed, eps);
}

}  // namespace

EpisodeResult run_episode(const CommGraph& graph, std::span<const GpModel> models,
                          std::span<const AgentSettings> settings,
                          std::span<const std::vector<double>> queries,
                          std::span<const double> times, const ScalarField& truth,
                          const EpisodeSpec& spec, Rng& noise) {
  const std::size_t n_agents = graph.size();
  if (models.size() != n_agents || settings.size() != n_agents) {
    throw ConfigError("episode: graph has " + std::to_string(n_agents) + " agents but " +
                      std::to_string(models.size()) + " models and " +
                      std::to_string(settings.size()) + " agent settings were given");
  }
  if (times.size() != queries.size()) throw ContractError("episode: one time per query required");
  if (spec.methods.empty()) throw ConfigError("episode: no methods");
  for (const GpModel& m : models) {
    if (!m.fresh()) throw ContractError("episode: every model must be fitted");
  }
  if (!(spec.measurement_noise_std >= 0.0)) throw ConfigError("episode: negative measurement noise");
  const std::size_t n_methods = spec.methods.size();

  EpisodeResult result;
  result.logs.reserve(n_agents);
  for (AgentId i = 0; i < n_agents; ++i) result.logs.emplace_back(i, spec.retain_history);
  result.steps.reserve(queries.size());

  std::vector<std::vector<double>> own;  // [agent * n_methods + method]
  std::vector<bool> own_stopped(n_agents * n_methods, false);
  if (spec.own_system) {
    if (spec.own_initial_state.size() != 3) throw ConfigError("episode: own initial state must be 3-D");
    own.assign(n_agents * n_methods, spec.own_initial_state);
    for (AgentId i = 0; i < n_agents; ++i) {
      for (std::size_t q = 0; q < n_methods; ++q) {
        result.own_trajectories.push_back({0, i, q, spec.own_initial_state});
      }
    }
  }
  std::normal_distribution<double> gauss(0.0, 1.0);

  for (std::size_t k = 0; k < queries.size(); ++k) {
    const std::vector<double>& x = queries[k];
    StepTrace trace;
    trace.step = k;
    trace.t = times[k];
    trace.state = x;
    trace.f_true = truth(x);
    trace.entries.reserve(n_agents * n_methods);

    try {
      for (AgentId i = 0; i < n_agents; ++i) {
        const auto closed = graph.closed_neighborhood(i);
        const std::optional<NormalizedTrust> trust = neighbourhood_trust(closed, result.logs);
        PriGpOptions options;
        options.sbar = settings[i].sbar;
        options.sigma_h = settings[i].sigma_h;
        options.rule = spec.rule;
        options.variance_weighting = spec.variance_weighting;
        for (std::size_t q = 0; q < n_methods; ++q) {
          const AggregateResult r = aggregate(spec.methods[q], i, x, models, closed,
                                              trust ? &*trust : nullptr, options);
          AgentStep e;
          e.agent = i;
          e.method = q;
          e.f_pred = r.value;
          e.abs_error = std::abs(r.value - trace.f_true);
          if (r.weights) {
            e.elected = r.weights->agents;
            e.weights = r.weights->weights;
          } else if (spec.methods[q].kind == MethodKind::kIgp) {
            e.elected = {i};
          } else {
            e.elected.assign(closed.begin(), closed.end());
          }
          e.counters = r.counters;
          trace.entries.push_back(std::move(e));

          if (spec.own_system && !own_stopped[i * n_methods + q]) {
            std::vector<double>& chi = own[i * n_methods + q];
            const LorenzSystem& sys = *spec.own_system;
            const ScalarField learned = [&](std::span<const double> p) {
              return aggregate(spec.methods[q], i, p, models, closed, trust ? &*trust : nullptr,
                               options)
                  .value;
            };
            // A learned copy may leave every region where its model is
            // meaningful; it then stops, the episode goes on.
            try {
              const auto rhs = dynamics_rhs(chi, sys.s, sys.r, learned);
              chi = euler_step(chi, rhs, sys.dt, k + 1);
              result.own_trajectories.push_back({k + 1, i, q, chi});
            } catch (const NumericError&) {
              own_stopped[i * n_methods + q] = true;
              result.own_diverged.push_back({k + 1, i, q, chi});
            }
          }
        }
      }

      const double y = trace.f_true + spec.measurement_noise_std * gauss(noise);
      for (AgentId i = 0; i < n_agents; ++i) {
        result.logs[i].record(models[i].prior_mean(x), y, trace.t, x);
      }
    } catch (const NumericError& e) {
      throw NumericError("step " + std::to_string(k) + ": " + e.what());
    } catch (const InputError& e) {
      throw InputError("step " + std::to_string(k) + ": " + e.what());
    }
    result.steps.push_back(std::move(trace));
  }
  return result;
}

std::size_t trial_threads() {
  if (const char* env = std::getenv("PRIGP_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

std::vector<ErrorSummaryRow> summarize_trials(const std::vector<EpisodeResult>& trials) {
  std::vector<ErrorSummaryRow> rows;
  if (trials.empty()) return rows;
  const EpisodeResult& first = trials.front();
  for (const EpisodeResult& tr : trials) {
    bool same = tr.steps.size() == first.steps.size();
    for (std::size_t k = 0; same && k < tr.steps.size(); ++k) {
      same = tr.steps[k].entries.size() == first.steps[k].entries.size();
    }
    if (!same) throw ContractError("summarize_trials: trials differ in shape");
  }
  const double n = static_cast<double>(trials.size());
  for (std::size_t k = 0; k < first.steps.size(); ++k) {
    for (std::size_t e = 0; e < first.steps[k].entries.size(); ++e) {
      double sum = 0.0;
      for (const EpisodeResult& tr : trials) sum += tr.steps[k].entries[e].abs_error;
      const double mean = sum / n;
      double sq = 0.0;
      for (const EpisodeResult& tr : trials) {
        const double d = tr.steps[k].entries[e].abs_error - mean;
        sq += d * d;
      }
      const AgentStep& ref = first.steps[k].entries[e];
      rows.push_back({k, ref.agent, ref.method, mean, std::sqrt(sq / n)});
    }
  }
  return rows;
}

}  // namespace prigp
