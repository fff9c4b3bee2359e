#pragma once
// Gaussian process regression with a non-zero prior mean function.
//
// Kernel convention: the ARD squared-exponential kernel is
//
//   k(x, x') = sigma_r^2 * exp(-0.5 * sum_j l_j^2 * (x_j - x'_j)^2)
//
// where l_j MULTIPLIES the coordinate distance (an inverse lengthscale). Most
// GP libraries divide by a lengthscale instead; KernelParams::from_lengthscales
// converts from that convention.

#include <atomic>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "prigp/domain.hpp"
#include "prigp/prior_expr.hpp"

namespace prigp {

struct KernelParams {
  double signal_std = 1.0;                  // sigma_r
  std::vector<double> inverse_lengthscales; // l_j, one per input dimension
  double noise_std = 0.1;                   // sigma_n

  /// Build from conventional lengthscales: l_j = 1 / lengthscale_j.
  static KernelParams from_lengthscales(double signal_std, std::span<const double> lengthscales,
                                        double noise_std);

  std::size_t dim() const { return inverse_lengthscales.size(); }
  double signal_variance() const { return signal_std * signal_std; }
  double noise_variance() const { return noise_std * noise_std; }

  /// Throws InputError unless every parameter is finite and positive and dim() == m.
  void validate(std::size_t m) const;
};

/// k(x, x2). Exactly symmetric in its arguments.
double kernel_eval(std::span<const double> x, std::span<const double> x2,
                   const KernelParams& params);

/// Lipschitz constant of x -> k(x, x') for the ARD kernel:
/// sigma_r^2 * max_j l_j * exp(-1/2).
double kernel_lipschitz(const KernelParams& params);

struct Dataset {
  std::vector<std::vector<double>> inputs;
  std::vector<double> outputs;

  std::size_t size() const { return outputs.size(); }
  bool empty() const { return outputs.empty(); }
};

/// K(X) = K(X, X) + sigma_n^2 I. Requires at least one point.
Eigen::MatrixXd gram_matrix(const Dataset& data, const KernelParams& params);

struct Prediction {
  double mean = 0.0;
  std::optional<double> variance;  // absent when the caller skipped it
};

/// Monotone call counter that survives copies of its owner.
class CallCounter {
 public:
  CallCounter() = default;
  CallCounter(const CallCounter& other) : n_(other.get()) {}
  CallCounter& operator=(const CallCounter& other) {
    n_.store(other.get(), std::memory_order_relaxed);
    return *this;
  }
  void bump() const { n_.fetch_add(1, std::memory_order_relaxed); }
  std::uint64_t get() const { return n_.load(std::memory_order_relaxed); }
  void reset() const { n_.store(0, std::memory_order_relaxed); }

 private:
  mutable std::atomic<std::uint64_t> n_{0};
};

/// One agent's GP. Predictions require a fresh factorization: call fit()
/// after construction with data and after append_observation().
class GpModel {
 public:
  GpModel(KernelParams params, PriorMeanFunction prior, Box domain, Dataset data = {});

  /// Factorise K(X). On Cholesky failure, retries with diagonal jitter
  /// 1e-10 * sigma_r^2, growing x10, at most 4 retries; throws NumericError
  /// if all fail.
  void fit();

  /// Extend the dataset; the model becomes stale until the next fit().
  void append_observation(std::span<const double> x, double y);

  bool fresh() const { return fresh_; }

  double posterior_mean(std::span<const double> x) const;

  /// Clamped to [0, k(x,x)]; raw values below -1e-8 sigma_r^2 throw NumericError.
  /// Every call bumps variance_calls().
  double posterior_variance(std::span<const double> x) const;

  Prediction predict(std::span<const double> x, bool with_variance) const;

  /// k(x, x) for this stationary kernel.
  double prior_variance() const { return params_.signal_variance(); }

  double prior_mean(std::span<const double> x) const { return prior_(x); }

  const KernelParams& params() const { return params_; }
  const PriorMeanFunction& prior() const { return prior_; }
  const Box& domain() const { return domain_; }
  const Dataset& data() const { return data_; }
  std::size_t size() const { return data_.size(); }

  /// Diagonal jitter added on top of sigma_n^2 by the last fit (0 if none).
  double jitter() const { return jitter_; }
  /// Lower Cholesky factor of K(X) + jitter I.
  const Eigen::MatrixXd& factor() const;
  /// K(X) + jitter I as factorised.
  const Eigen::MatrixXd& factored_gram() const;
  /// K(X)^{-1} (Y - prior(X)).
  const Eigen::VectorXd& weights() const;
  /// Y - prior(X).
  const Eigen::VectorXd& prior_residual() const;
  /// Spectral norm of (K(X) + jitter I)^{-1}; 0 for an empty model.
  double inverse_gram_norm() const;

  /// K(x, X) as a dense row.
  Eigen::VectorXd cross_covariance(std::span<const double> x) const;

  std::uint64_t variance_calls() const { return variance_calls_.get(); }
  std::uint64_t mean_calls() const { return mean_calls_.get(); }
  void reset_counters() const {
    variance_calls_.reset();
    mean_calls_.reset();
  }

 private:
  void require_fresh(const char* what) const;
  void check_point(std::span<const double> x) const;

  KernelParams params_;
  PriorMeanFunction prior_;
  Box domain_;
  Dataset data_;

  std::vector<double> weights_sq_;  // l_j^2
  Eigen::MatrixXd columns_;         // N x m, column-major
  Eigen::MatrixXd gram_;
  Eigen::MatrixXd factor_;
  Eigen::VectorXd residual_;
  Eigen::VectorXd alpha_;
  double jitter_ = 0.0;
  bool fresh_ = false;

  CallCounter variance_calls_;
  CallCounter mean_calls_;
};

}  // namespace prigp
