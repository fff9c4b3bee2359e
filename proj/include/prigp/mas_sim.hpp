#pragma once
// Multi-agent simulation: communication graph, the 3-D Lorenz-type system,
// the synchronous elect/aggregate/measure loop and Monte Carlo orchestration.

#include <array>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prigp/aggregate.hpp"
#include "prigp/rng.hpp"

namespace prigp {

/// Undirected graph with self-loops.
class CommGraph {
 public:
  std::size_t size() const { return adjacency_.size(); }
  const std::vector<std::vector<int>>& adjacency() const { return adjacency_; }
  /// N̄_i, ascending.
  std::span<const AgentId> closed_neighborhood(AgentId i) const { return closed_.at(i); }
  /// N_i = N̄_i \ {i}, ascending.
  std::vector<AgentId> neighbors(AgentId i) const;

 private:
  friend CommGraph build_graph(const std::vector<std::vector<int>>& adjacency);
  std::vector<std::vector<int>> adjacency_;
  std::vector<std::vector<AgentId>> closed_;
};

/// Throws ConfigError unless the matrix is square, binary, symmetric and has
/// a unit diagonal.
CommGraph build_graph(const std::vector<std::vector<int>>& adjacency);

using ScalarField = std::function<double(std::span<const double>)>;

/// (s (y - x), r x - y - x z, x y + f(chi)).
std::array<double, 3> dynamics_rhs(std::span<const double> chi, double s, double r,
                                   const ScalarField& f);

/// chi + dt * rhs. Throws NumericError naming `step` if the result is not finite.
std::vector<double> euler_step(std::span<const double> chi, std::span<const double> rhs,
                               double dt, std::size_t step = 0);

struct LorenzSystem {
  double s = 10.0;
  double r = 28.0;
  double dt = 0.01;
  std::size_t steps = 150;
};

/// steps + 1 states starting at `initial`, integrated with the given f.
std::vector<std::vector<double>> integrate(const LorenzSystem& system,
                                           std::span<const double> initial, const ScalarField& f);

struct AgentSettings {
  std::size_t sbar = 0;
  double sigma_h = 1.0;
};

struct EpisodeSpec {
  std::vector<AggregationMethod> methods;
  ElectionRule rule = ElectionRule::kThreshold;
  VarianceWeighting variance_weighting = VarianceWeighting::kInverseVariance;
  double measurement_noise_std = 0.1;
  bool retain_history = false;
  /// When set, every (agent, method) also integrates its own copy of the
  /// system from `own_initial_state`, with f replaced by its aggregate f~_i.
  std::optional<LorenzSystem> own_system;
  std::vector<double> own_initial_state;
};

struct AgentStep {
  AgentId agent = 0;
  std::size_t method = 0;  // index into EpisodeSpec::methods
  double f_pred = 0.0;
  double abs_error = 0.0;
  std::vector<AgentId> elected;  // agents whose models were queried, ascending
  std::vector<double> weights;   // PriGp only, parallel to elected
  AggregateCounters counters;
};

struct StepTrace {
  std::size_t step = 0;
  double t = 0.0;
  std::vector<double> state;  // query point / true state
  double f_true = 0.0;
  std::vector<AgentStep> entries;  // agent-major, then method
};

struct OwnTrajectoryPoint {
  std::size_t step = 0;
  AgentId agent = 0;
  std::size_t method = 0;
  std::vector<double> state;
};

struct EpisodeResult {
  std::vector<StepTrace> steps;
  std::vector<PriorErrorLog> logs;
  std::vector<OwnTrajectoryPoint> own_trajectories;
  /// Learned copies that stopped: the step that failed and the last state.
  std::vector<OwnTrajectoryPoint> own_diverged;
};

/// For every query k: each agent normalises the accumulated errors of its
/// closed neighbourhood, elects and aggregates with every method; then the
/// noisy measurement f(chi_k) + N(0, sigma^2) is drawn from `noise` and every
/// agent records its prior error. Agents whose neighbourhood has no complete
/// history use the cold-start rule. Models must be fitted.
EpisodeResult run_episode(const CommGraph& graph, std::span<const GpModel> models,
                          std::span<const AgentSettings> settings,
                          std::span<const std::vector<double>> queries,
                          std::span<const double> times, const ScalarField& truth,
                          const EpisodeSpec& spec, Rng& noise);

/// Worker count for independent trials: PRIGP_THREADS if set (>= 1), else
/// the hardware concurrency.
std::size_t trial_threads();

/// Runs fn(t) for t = 0..trials-1 on up to `threads` workers; results are in
/// trial order. The exception of the lowest failing trial is rethrown.
template <class Fn>
auto run_trials(std::size_t trials, std::size_t threads, Fn&& fn)
    -> std::vector<decltype(fn(std::size_t{}))>;

struct ErrorSummaryRow {
  std::size_t step = 0;
  AgentId agent = 0;
  std::size_t method = 0;
  double mean_abs_error = 0.0;
  double std_abs_error = 0.0;  // population
};

/// Mean and population standard deviation of |f~_i - f| across trials for
/// every (step, agent, method). All trials must share the same shape.
std::vector<ErrorSummaryRow> summarize_trials(const std::vector<EpisodeResult>& trials);

}  // namespace prigp

#include "prigp/detail/run_trials.hpp"
