#include "prigp/experiments.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "prigp/csv.hpp"
#include "prigp/error.hpp"

namespace prigp {
namespace {

using nlohmann::json;

std::vector<std::string> method_labels(const ExperimentConfig& cfg) {
  std::vector<std::string> out;
  for (const auto& m : cfg.methods) out.push_back(m.label());
  return out;
}

std::string join_ids(const std::vector<AgentId>& ids) {
  std::string s;
  for (AgentId j : ids) {
    if (!s.empty()) s += ';';
    s += std::to_string(j + 1);
  }
  return s;
}

Dataset draw_dataset(const ExperimentConfig& cfg, const PriorMeanFunction& truth, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Dataset d;
  d.inputs = sample_points(cfg.domain, cfg.data.points, rng);
  for (const auto& x : d.inputs) {
    double y = truth(x);
    if (cfg.data.noise_std > 0.0) y += cfg.data.noise_std * gauss(rng);
    d.outputs.push_back(y);
  }
  return d;
}

EpisodeSpec episode_spec(const ExperimentConfig& cfg, std::vector<AggregationMethod> methods,
                         double measurement_noise) {
  EpisodeSpec spec;
  spec.methods = std::move(methods);
  spec.rule = cfg.rule;
  spec.variance_weighting = cfg.variance_weighting;
  spec.measurement_noise_std = measurement_noise;
  spec.retain_history = cfg.output.audit;
  return spec;
}

void write_trace(const std::filesystem::path& path, const std::vector<std::string>& labels,
                 const std::vector<EpisodeResult>& episodes, std::size_t count) {
  CsvWriter w(path, {"trial", "step", "t", "agent", "method", "f_true", "f_pred", "abs_error",
                     "elected_set", "msgs", "var_calls"});
  for (std::size_t trial = 0; trial < count && trial < episodes.size(); ++trial) {
    for (const StepTrace& st : episodes[trial].steps) {
      for (const AgentStep& e : st.entries) {
        w.field(trial).field(st.step).field(st.t).field(e.agent + 1).field(labels[e.method]);
        w.field(st.f_true).field(e.f_pred).field(e.abs_error).field(join_ids(e.elected));
        w.field(static_cast<unsigned long long>(e.counters.messages));
        w.field(static_cast<unsigned long long>(e.counters.var_evals));
        w.end_row();
      }
    }
  }
}

void write_audit(const std::filesystem::path& path, const std::vector<EpisodeResult>& episodes,
                 std::size_t count, std::size_t dim) {
  std::vector<std::string> header{"trial", "agent", "k", "t"};
  for (std::size_t j = 0; j < dim; ++j) header.push_back("x" + std::to_string(j + 1));
  header.push_back("prior_error");
  CsvWriter w(path, header);
  for (std::size_t trial = 0; trial < count && trial < episodes.size(); ++trial) {
    for (const PriorErrorLog& log : episodes[trial].logs) {
      std::size_t k = 0;
      for (const PriorErrorRecord& r : log.history()) {
        w.field(trial).field(log.agent() + 1).field(++k).field(r.t);
        for (double v : r.x) w.field(v);
        w.field(r.error);
        w.end_row();
      }
    }
  }
}

void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

void strip_entries(EpisodeResult& ep) {
  for (StepTrace& st : ep.steps) {
    for (AgentStep& e : st.entries) {
      std::vector<AgentId>().swap(e.elected);
      std::vector<double>().swap(e.weights);
    }
  }
  std::vector<PriorErrorLog>().swap(ep.logs);
}

}  // namespace

std::vector<std::vector<double>> sample_points(const Box& box, std::size_t count, Rng& rng) {
  std::vector<std::vector<double>> pts(count, std::vector<double>(box.dim()));
  for (auto& p : pts) {
    for (std::size_t j = 0; j < box.dim(); ++j) {
      std::uniform_real_distribution<double> u(box.lower[j], box.upper[j]);
      p[j] = u(rng);
    }
  }
  return pts;
}

TrialSetup build_trial(const ExperimentConfig& cfg, std::uint64_t trial_seed) {
  TrialSetup s{build_graph(cfg.adjacency), {}, {}, PriorMeanFunction(cfg.target, cfg.domain.dim())};
  Rng rng = make_rng(trial_seed, kStreamTraining);
  const KernelParams kernel = cfg.kernel.params();
  std::optional<Dataset> shared;
  if (cfg.data.shared) shared = draw_dataset(cfg, s.truth, rng);
  s.models.reserve(cfg.agents.size());
  for (const AgentConfig& a : cfg.agents) {
    Dataset d = shared ? *shared : draw_dataset(cfg, s.truth, rng);
    s.models.emplace_back(kernel, PriorMeanFunction(a.prior, cfg.domain.dim()), cfg.domain, std::move(d));
    s.models.back().fit();
    s.settings.push_back({a.sbar, a.sigma_h});
  }
  return s;
}

// ---------------------------------------------------------------- func-approx

FuncApproxResult run_func_approx(const ExperimentConfig& cfg) {
  const std::size_t n_methods = cfg.methods.size();
  const std::size_t n_agents = cfg.agents.size();
  struct TrialOut {
    ResultTable table;
    std::vector<std::uint64_t> var_calls, messages;
    std::optional<EpisodeResult> episode;
  };
  const auto labels = method_labels(cfg);

  auto trial_fn = [&](std::size_t t) {
    const std::uint64_t seed = cfg.seed + t;
    TrialSetup setup = build_trial(cfg, seed);
    Rng qrng = make_rng(seed, kStreamQueries);
    const auto queries = sample_points(cfg.domain, cfg.test.points, qrng);
    std::vector<double> times(queries.size());
    for (std::size_t k = 0; k < times.size(); ++k) times[k] = static_cast<double>(k);
    Rng noise = make_rng(seed, kStreamMeasurement);
    const ScalarField truth = [&](std::span<const double> x) { return setup.truth(x); };
    EpisodeResult ep = run_episode(setup.graph, setup.models, setup.settings, queries, times, truth,
                                   episode_spec(cfg, cfg.methods, cfg.test.measurement_noise_std),
                                   noise);
    TrialOut out;
    out.table.methods = labels;
    out.table.errors.assign(n_methods, std::vector<double>(n_agents, 0.0));
    out.table.sums.assign(n_methods, 0.0);
    out.var_calls.assign(n_methods, 0);
    out.messages.assign(n_methods, 0);
    for (const StepTrace& st : ep.steps) {
      for (const AgentStep& e : st.entries) {
        out.table.errors[e.method][e.agent] += e.abs_error;
        out.var_calls[e.method] += e.counters.var_evals;
        out.messages[e.method] += e.counters.messages;
      }
    }
    const double n = std::max<double>(1.0, static_cast<double>(ep.steps.size()));
    for (std::size_t q = 0; q < n_methods; ++q) {
      for (double& v : out.table.errors[q]) v /= n;
    }
    for (std::size_t q = 0; q < n_methods; ++q) {
      for (double v : out.table.errors[q]) out.table.sums[q] += v;
    }
    if (t < cfg.output.trace_trials) out.episode = std::move(ep);
    return out;
  };

  auto outs = run_trials(cfg.trials, trial_threads(), trial_fn);

  FuncApproxResult r;
  r.table.methods = labels;
  r.table.errors.assign(n_methods, std::vector<double>(n_agents, 0.0));
  r.table.sums.assign(n_methods, 0.0);
  r.var_calls.assign(n_methods, 0);
  r.messages.assign(n_methods, 0);
  for (auto& o : outs) {
    for (std::size_t q = 0; q < n_methods; ++q) {
      for (std::size_t i = 0; i < n_agents; ++i) r.table.errors[q][i] += o.table.errors[q][i];
      r.var_calls[q] += o.var_calls[q];
      r.messages[q] += o.messages[q];
    }
    if (o.episode) r.traced.push_back(std::move(*o.episode));
    r.per_trial.push_back(std::move(o.table));
  }
  const double trials = static_cast<double>(cfg.trials);
  for (std::size_t q = 0; q < n_methods; ++q) {
    for (double& v : r.table.errors[q]) v /= trials;
    for (double v : r.table.errors[q]) r.table.sums[q] += v;
  }
  return r;
}

void write_func_approx(const ExperimentConfig& cfg, const FuncApproxResult& result,
                       const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::size_t n_agents = cfg.agents.size();
  std::vector<std::string> header{"method"};
  for (std::size_t i = 0; i < n_agents; ++i) header.push_back("agent_" + std::to_string(i + 1));
  header.push_back("sum");
  {
    CsvWriter w(dir / "results.csv", header);
    for (std::size_t q = 0; q < result.table.methods.size(); ++q) {
      w.field(result.table.methods[q]);
      for (double v : result.table.errors[q]) w.field(v);
      w.field(result.table.sums[q]);
      w.end_row();
    }
  }
  const auto labels = method_labels(cfg);
  write_trace(dir / "trace.csv", labels, result.traced, result.traced.size());
  if (cfg.output.audit) write_audit(dir / "audit.csv", result.traced, result.traced.size(), cfg.domain.dim());

  json doc;
  doc["experiment"] = "func-approx";
  doc["seed"] = cfg.seed;
  doc["trials"] = cfg.trials;
  doc["test_points"] = cfg.test.points;
  json methods = json::array();
  for (std::size_t q = 0; q < labels.size(); ++q) {
    methods.push_back({{"method", labels[q]},
                       {"mean_abs_error", result.table.errors[q]},
                       {"sum", result.table.sums[q]},
                       {"var_calls", result.var_calls[q]},
                       {"messages", result.messages[q]}});
  }
  doc["methods"] = methods;
  write_json(dir / "summary.json", doc);
}

// ------------------------------------------------------------------ dyn-ident

DynIdentResult run_dyn_ident(const ExperimentConfig& cfg) {
  if (cfg.domain.dim() != 3) throw ConfigError("dyn-ident needs a 3-dimensional domain");
  const LorenzSystem& sys = cfg.dynamics.system;
  const std::size_t n_methods = cfg.methods.size();

  auto initial_state = [&](std::uint64_t seed) {
    Rng rng = make_rng(seed, kStreamInitialState);
    std::vector<double> x(3);
    for (std::size_t j = 0; j < 3; ++j) {
      std::uniform_real_distribution<double> u(cfg.dynamics.initial_lower[j], cfg.dynamics.initial_upper[j]);
      x[j] = u(rng);
    }
    return x;
  };

  auto run_one = [&](std::uint64_t seed, std::span<const double> initial, bool own,
                     std::vector<std::vector<double>>* states_out) {
    TrialSetup setup = build_trial(cfg, seed);
    const ScalarField truth = [&](std::span<const double> x) { return setup.truth(x); };
    auto states = integrate(sys, initial, truth);
    if (states_out != nullptr) *states_out = states;
    states.pop_back();  // the query at step k is the state before the k-th update
    std::vector<double> times(states.size());
    for (std::size_t k = 0; k < times.size(); ++k) times[k] = static_cast<double>(k) * sys.dt;
    EpisodeSpec spec = episode_spec(cfg, cfg.methods, cfg.test.measurement_noise_std);
    if (own) {
      spec.own_system = sys;
      spec.own_initial_state.assign(initial.begin(), initial.end());
    }
    Rng noise = make_rng(seed, kStreamMeasurement);
    EpisodeResult ep = run_episode(setup.graph, setup.models, setup.settings, states, times, truth, spec, noise);
    return ep;
  };

  DynIdentResult r;
  r.trials = run_trials(cfg.trials, trial_threads(), [&](std::size_t t) {
    const std::uint64_t seed = cfg.seed + t;
    const auto init = initial_state(seed);
    EpisodeResult ep = run_one(seed, init, false, nullptr);
    if (t >= cfg.output.trace_trials) strip_entries(ep);
    return ep;
  });
  r.summary = summarize_trials(r.trials);

  r.episode_mean.assign(n_methods, 0.0);
  std::vector<double> counts(n_methods, 0.0);
  for (const EpisodeResult& ep : r.trials) {
    for (const StepTrace& st : ep.steps) {
      for (const AgentStep& e : st.entries) {
        r.episode_mean[e.method] += e.abs_error;
        counts[e.method] += 1.0;
      }
    }
  }
  for (std::size_t q = 0; q < n_methods; ++q) {
    if (counts[q] > 0.0) r.episode_mean[q] /= counts[q];
  }

  if (cfg.dynamics.trajectories) {
    r.trajectory_run = run_one(cfg.seed, cfg.dynamics.trajectory_initial_state, true, &r.true_trajectory);
  }
  return r;
}

void write_dyn_ident(const ExperimentConfig& cfg, const DynIdentResult& result,
                     const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto labels = method_labels(cfg);
  {
    CsvWriter w(dir / "summary.csv", {"step", "agent", "method", "mean_abs_error", "std_abs_error"});
    for (const ErrorSummaryRow& row : result.summary) {
      w.field(row.step).field(row.agent + 1).field(labels[row.method]);
      w.field(row.mean_abs_error).field(row.std_abs_error);
      w.end_row();
    }
  }
  write_trace(dir / "trace.csv", labels, result.trials, cfg.output.trace_trials);
  if (cfg.output.audit) write_audit(dir / "audit.csv", result.trials, cfg.output.trace_trials, 3);
  if (result.trajectory_run) {
    // agent 0 is the true system.
    CsvWriter w(dir / "trajectory.csv", {"step", "t", "agent", "method", "x", "y", "z"});
    const double dt = cfg.dynamics.system.dt;
    for (std::size_t k = 0; k < result.true_trajectory.size(); ++k) {
      const auto& s = result.true_trajectory[k];
      w.field(k).field(static_cast<double>(k) * dt).field(0).field("true");
      w.field(s[0]).field(s[1]).field(s[2]);
      w.end_row();
    }
    for (const OwnTrajectoryPoint& p : result.trajectory_run->own_trajectories) {
      w.field(p.step).field(static_cast<double>(p.step) * dt).field(p.agent + 1).field(labels[p.method]);
      w.field(p.state[0]).field(p.state[1]).field(p.state[2]);
      w.end_row();
    }
  }
  json doc;
  doc["experiment"] = "dyn-ident";
  doc["seed"] = cfg.seed;
  doc["trials"] = cfg.trials;
  doc["steps"] = cfg.dynamics.system.steps;
  json methods = json::array();
  for (std::size_t q = 0; q < labels.size(); ++q) {
    methods.push_back({{"method", labels[q]}, {"episode_mean_abs_error", result.episode_mean[q]}});
  }
  doc["methods"] = methods;
  if (result.trajectory_run) {
    json diverged = json::array();
    for (const OwnTrajectoryPoint& p : result.trajectory_run->own_diverged) {
      diverged.push_back({{"agent", p.agent + 1}, {"method", labels[p.method]}, {"step", p.step}});
    }
    doc["diverged_trajectories"] = diverged;
  }
  write_json(dir / "summary.json", doc);
}

// --------------------------------------------------------------- bounds-check

BoundsCheckResult run_bounds_check(const ExperimentConfig& cfg) {
  const std::size_t n_agents = cfg.agents.size();
  TrialSetup setup = build_trial(cfg, cfg.seed);
  const ScalarField truth = [&](std::span<const double> x) { return setup.truth(x); };

  BoundsCheckResult r;
  std::vector<BoundParams> params(n_agents);
  const double L_f = cfg.bounds.L_f.value_or(expr::lipschitz_estimate(setup.truth.ast(), cfg.domain));
  r.agents.resize(n_agents);
  for (AgentId i = 0; i < n_agents; ++i) {
    BoundParams& p = params[i];
    p.tau = cfg.bounds.tau;
    p.delta = cfg.bounds.delta;
    p.domain = cfg.domain;
    p.L_f = L_f;
    p.L_fhat = cfg.bounds.L_fhat.value_or(
        expr::lipschitz_estimate(setup.models[i].prior().ast(), cfg.domain));
    p.L_kappa = cfg.bounds.L_kappa;
    p.sigma_reading = cfg.bounds.sigma_reading;
    r.agents[i].constants = bound_constants(setup.models[i], p);
    r.agents[i].L_f = p.L_f;
    r.agents[i].L_fhat = p.L_fhat;
  }

  Rng qrng = make_rng(cfg.seed, kStreamQueries);
  r.queries = sample_points(cfg.domain, cfg.bounds.points, qrng);
  std::vector<double> times(r.queries.size());
  for (std::size_t k = 0; k < times.size(); ++k) times[k] = static_cast<double>(k);
  AggregationMethod method;
  method.kind = MethodKind::kPriGp;
  method.c = cfg.bounds.c;
  Rng noise = make_rng(cfg.seed, kStreamMeasurement);
  const EpisodeResult ep = run_episode(setup.graph, setup.models, setup.settings, r.queries, times,
                                       truth, episode_spec(cfg, {method}, cfg.test.measurement_noise_std),
                                       noise);

  std::vector<std::size_t> violations(n_agents, 0), agg_violations(n_agents, 0);
  std::vector<double> elected_sum(n_agents, 0.0);
  std::size_t overall_violations = 0;
  for (const StepTrace& st : ep.steps) {
    std::vector<double> eta(n_agents);
    for (AgentId j = 0; j < n_agents; ++j) {
      eta[j] = single_model_bound(setup.models[j], st.state, params[j], r.agents[j].constants.beta,
                                  r.agents[j].constants.gamma);
    }
    std::vector<double> eta_agg(n_agents);
    std::vector<std::size_t> sizes(n_agents);
    double err_sq = 0.0;
    for (const AgentStep& e : st.entries) {
      const AgentId i = e.agent;
      std::vector<double> etas;
      for (AgentId j : e.elected) etas.push_back(eta[j]);
      eta_agg[i] = aggregated_bound(e.weights, etas);
      sizes[i] = e.elected.size();
      BoundsCheckRow row;
      row.step = st.step;
      row.agent = i;
      row.f_true = st.f_true;
      row.mean = setup.models[i].posterior_mean(st.state);
      row.eta = eta[i];
      row.aggregate = e.f_pred;
      row.eta_aggregated = eta_agg[i];
      row.elected = sizes[i];
      if (std::abs(row.mean - row.f_true) > row.eta) ++violations[i];
      if (e.abs_error > row.eta_aggregated) ++agg_violations[i];
      elected_sum[i] += static_cast<double>(sizes[i]);
      r.agents[i].max_elected = std::max(r.agents[i].max_elected, sizes[i]);
      r.agents[i].min_elected = st.step == 0 ? sizes[i] : std::min(r.agents[i].min_elected, sizes[i]);
      err_sq += e.abs_error * e.abs_error;
      r.rows.push_back(row);
    }
    const OverallBound ob = overall_bound(eta_agg, sizes, cfg.bounds.delta);
    if (std::sqrt(err_sq) > ob.bound) ++overall_violations;
    r.min_probability = std::min(r.min_probability, ob.probability);
    r.probability_warning = r.probability_warning || ob.warning;
  }
  const double n = std::max<double>(1.0, static_cast<double>(ep.steps.size()));
  for (AgentId i = 0; i < n_agents; ++i) {
    r.agents[i].violation_rate = static_cast<double>(violations[i]) / n;
    r.agents[i].aggregated_violation_rate = static_cast<double>(agg_violations[i]) / n;
    r.agents[i].mean_elected = elected_sum[i] / n;
  }
  r.overall_violation_rate = static_cast<double>(overall_violations) / n;
  return r;
}

void write_bounds_check(const ExperimentConfig& cfg, const BoundsCheckResult& result,
                        const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::size_t m = cfg.domain.dim();
  std::vector<std::string> header{"step", "agent"};
  for (std::size_t j = 0; j < m; ++j) header.push_back("x" + std::to_string(j + 1));
  for (const char* h : {"f_true", "mu", "abs_error", "eta", "violated", "f_agg", "agg_abs_error",
                        "eta_agg", "agg_violated", "elected_size"}) {
    header.emplace_back(h);
  }
  CsvWriter w(dir / "coverage.csv", header);
  for (const BoundsCheckRow& row : result.rows) {
    w.field(row.step).field(row.agent + 1);
    for (double v : result.queries[row.step]) w.field(v);
    const double err = std::abs(row.mean - row.f_true);
    const double agg_err = std::abs(row.aggregate - row.f_true);
    w.field(row.f_true).field(row.mean).field(err).field(row.eta).field(err > row.eta ? 1 : 0);
    w.field(row.aggregate).field(agg_err).field(row.eta_aggregated);
    w.field(agg_err > row.eta_aggregated ? 1 : 0).field(row.elected);
    w.end_row();
  }

  json doc;
  doc["experiment"] = "bounds-check";
  doc["seed"] = cfg.seed;
  doc["tau"] = cfg.bounds.tau;
  doc["delta"] = cfg.bounds.delta;
  doc["points"] = cfg.bounds.points;
  doc["sigma_reading"] = cfg.bounds.sigma_reading == SigmaReading::kStandardDeviation ? "std" : "variance";
  json agents = json::array();
  for (std::size_t i = 0; i < result.agents.size(); ++i) {
    const AgentBoundSummary& a = result.agents[i];
    agents.push_back({{"agent", i + 1},
                      {"beta", a.constants.beta},
                      {"gamma", a.constants.gamma},
                      {"L_sigma2", a.constants.L_sigma2},
                      {"L_kappa", a.constants.L_kappa},
                      {"L_f", a.L_f},
                      {"L_fhat", a.L_fhat},
                      {"coverage", 1.0 - a.violation_rate},
                      {"violation_rate", a.violation_rate},
                      {"aggregated_violation_rate", a.aggregated_violation_rate},
                      {"mean_elected", a.mean_elected},
                      {"min_elected", a.min_elected},
                      {"max_elected", a.max_elected}});
  }
  doc["agents"] = agents;
  doc["overall_violation_rate"] = result.overall_violation_rate;
  doc["min_nominal_probability"] = result.min_probability;
  doc["probability_warning"] = result.probability_warning;
  write_json(dir / "summary.json", doc);
}

}  // namespace prigp
