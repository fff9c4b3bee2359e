#pragma once
// Experiment configuration: JSON ingestion, schema validation and defaults.
// Errors are ConfigError with a JSON-pointer path ("/agents/2/sbar: ...").

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "prigp/aggregate.hpp"
#include "prigp/bounds.hpp"
#include "prigp/mas_sim.hpp"

namespace prigp {

struct KernelConfig {
  double signal_std = 1.0;
  std::vector<double> lengthscales;
  /// "inverse": values multiply the distance; "lengthscale": they divide it.
  std::string convention = "inverse";
  double noise_std = 0.1;

  KernelParams params() const;
};

struct AgentConfig {
  std::string prior;
  std::size_t sbar = 0;
  double sigma_h = 1.0;
};

struct DataConfig {
  bool shared = true;         // one dataset for every agent, or one each
  std::size_t points = 8;
  double noise_std = 0.1;     // on training outputs
};

struct TestConfig {
  std::size_t points = 1000;
  double measurement_noise_std = 0.1;  // online measurements feeding the trust logs
};

struct DynamicsConfig {
  LorenzSystem system;
  std::vector<double> initial_lower{0.0, 0.0, 0.0};
  std::vector<double> initial_upper{1.0, 1.0, 1.0};
  std::vector<double> trajectory_initial_state{0.0, 1.0, 1.05};
  bool trajectories = true;
};

struct BoundsConfig {
  double tau = 0.01;
  double delta = 0.05;
  std::size_t points = 2000;
  SigmaReading sigma_reading = SigmaReading::kStandardDeviation;
  std::optional<double> L_f;
  std::optional<double> L_fhat;  // applied to every agent when given
  std::optional<double> L_kappa;
  double c = 1.0;                // weights used for the aggregated bound
};

struct OutputConfig {
  std::string dir = "out";
  bool audit = false;
  std::size_t trace_trials = 1;  // trace.csv covers trials [0, trace_trials)
};

enum class ExperimentKind { kFuncApprox, kDynIdent, kBoundsCheck };

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::kFuncApprox;
  std::uint64_t seed = 1;
  std::size_t trials = 1;
  std::vector<AggregationMethod> methods;
  Box domain;
  std::string target;
  KernelConfig kernel;
  std::vector<AgentConfig> agents;
  std::vector<std::vector<int>> adjacency;
  DataConfig data;
  TestConfig test;
  ElectionRule rule = ElectionRule::kThreshold;
  VarianceWeighting variance_weighting = VarianceWeighting::kInverseVariance;
  DynamicsConfig dynamics;
  BoundsConfig bounds;
  OutputConfig output;
};

std::string_view experiment_name(ExperimentKind kind);

/// Parses and validates. `origin` prefixes messages (usually the file path).
ExperimentConfig parse_config(std::string_view json_text, std::string_view origin = "config");
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace prigp
