#pragma once
// The three benchmark experiments. run_* computes, write_* emits files; the
// split lets tests inspect results without touching the filesystem.

#include <filesystem>
#include <optional>
#include <vector>

#include "prigp/config.hpp"

namespace prigp {

/// Fitted agents for one trial.
struct TrialSetup {
  CommGraph graph;
  std::vector<GpModel> models;
  std::vector<AgentSettings> settings;
  PriorMeanFunction truth;
};

/// Draws training data from the kStreamTraining stream of `trial_seed`
/// (uniform inputs in the domain, target outputs plus N(0, data.noise_std^2)),
/// one shared dataset or one per agent, and fits every model.
TrialSetup build_trial(const ExperimentConfig& cfg, std::uint64_t trial_seed);

/// Uniform draws in the domain.
std::vector<std::vector<double>> sample_points(const Box& box, std::size_t count, Rng& rng);

struct ResultTable {
  std::vector<std::string> methods;          // labels
  std::vector<std::vector<double>> errors;   // [method][agent] mean |f~ - f|
  std::vector<double> sums;                  // [method] sum over agents
};

struct FuncApproxResult {
  ResultTable table;                        // averaged over trials
  std::vector<ResultTable> per_trial;
  std::vector<EpisodeResult> traced;        // trials [0, trace_trials)
  std::vector<std::uint64_t> var_calls;     // [method] total over all trials
  std::vector<std::uint64_t> messages;      // [method] total over all trials
};

FuncApproxResult run_func_approx(const ExperimentConfig& cfg);
void write_func_approx(const ExperimentConfig& cfg, const FuncApproxResult& result,
                       const std::filesystem::path& dir);

struct DynIdentResult {
  std::vector<EpisodeResult> trials;  // per-entry vectors dropped beyond trace_trials
  std::vector<ErrorSummaryRow> summary;
  std::vector<double> episode_mean;   // [method] mean |f~ - f| over trials, steps, agents
  std::optional<EpisodeResult> trajectory_run;
  std::vector<std::vector<double>> true_trajectory;  // for trajectory_run
};

DynIdentResult run_dyn_ident(const ExperimentConfig& cfg);
void write_dyn_ident(const ExperimentConfig& cfg, const DynIdentResult& result,
                     const std::filesystem::path& dir);

struct AgentBoundSummary {
  BoundConstants constants;
  double L_f = 0.0;
  double L_fhat = 0.0;
  double violation_rate = 0.0;             // |mu_i - f| > eta_i
  double aggregated_violation_rate = 0.0;  // |f~_i - f| > eta~_i
  double mean_elected = 0.0;               // mean |S_i| over queries
  std::size_t min_elected = 0;
  std::size_t max_elected = 0;
};

struct BoundsCheckRow {
  std::size_t step = 0;
  AgentId agent = 0;
  double f_true = 0.0;
  double mean = 0.0;
  double eta = 0.0;
  double aggregate = 0.0;
  double eta_aggregated = 0.0;
  std::size_t elected = 0;
};

struct BoundsCheckResult {
  std::vector<AgentBoundSummary> agents;
  std::vector<std::vector<double>> queries;
  std::vector<BoundsCheckRow> rows;  // step-major
  double overall_violation_rate = 0.0;
  double min_probability = 1.0;
  bool probability_warning = false;
};

BoundsCheckResult run_bounds_check(const ExperimentConfig& cfg);
void write_bounds_check(const ExperimentConfig& cfg, const BoundsCheckResult& result,
                        const std::filesystem::path& dir);

}  // namespace prigp
