#include "prigp/kernel_gp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "prigp/csv.hpp"
#include "prigp/error.hpp"
#include "prigp/simd/kernel_row.hpp"

namespace prigp {
namespace {

constexpr int kMaxJitterRetries = 4;
constexpr double kInitialJitter = 1e-10;
constexpr double kNegativeVarianceTolerance = 1e-8;

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace

KernelParams KernelParams::from_lengthscales(double signal_std,
                                             std::span<const double> lengthscales,
                                             double noise_std) {
  KernelParams p;
  p.signal_std = signal_std;
  p.noise_std = noise_std;
  for (double ls : lengthscales) {
    if (!(ls > 0.0) || !std::isfinite(ls)) throw InputError("lengthscales must be positive");
    p.inverse_lengthscales.push_back(1.0 / ls);
  }
  return p;
}

void KernelParams::validate(std::size_t m) const {
  if (!(signal_std > 0.0) || !std::isfinite(signal_std)) {
    throw InputError("kernel signal_std must be positive");
  }
  if (!(noise_std > 0.0) || !std::isfinite(noise_std)) {
    throw InputError("kernel noise_std must be positive");
  }
  if (inverse_lengthscales.size() != m) {
    throw InputError("kernel has " + std::to_string(inverse_lengthscales.size()) +
                     " lengthscales for a " + std::to_string(m) + "-dimensional domain");
  }
  for (double l : inverse_lengthscales) {
    if (!(l > 0.0) || !std::isfinite(l)) throw InputError("inverse lengthscales must be positive");
  }
}

double kernel_eval(std::span<const double> x, std::span<const double> x2,
                   const KernelParams& params) {
  if (x.size() != x2.size() || x.size() != params.dim()) {
    throw InputError("kernel_eval: dimension mismatch (" + std::to_string(x.size()) + ", " +
                     std::to_string(x2.size()) + ", kernel " + std::to_string(params.dim()) + ")");
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double l = params.inverse_lengthscales[j];
    const double d = x[j] - x2[j];
    acc += (l * l) * (d * d);
  }
  return params.signal_variance() * std::exp(-0.5 * acc);
}

double kernel_lipschitz(const KernelParams& params) {
  const double lmax =
      *std::max_element(params.inverse_lengthscales.begin(), params.inverse_lengthscales.end());
  return params.signal_variance() * lmax * std::exp(-0.5);
}

Eigen::MatrixXd gram_matrix(const Dataset& data, const KernelParams& params) {
  const std::size_t n = data.size();
  if (n == 0) throw InputError("gram_matrix: empty dataset");
  const std::size_t m = params.dim();
  Eigen::MatrixXd cols(n, m);
  for (std::size_t p = 0; p < n; ++p) {
    if (data.inputs[p].size() != m) throw InputError("gram_matrix: input dimension mismatch");
    for (std::size_t j = 0; j < m; ++j) cols(p, j) = data.inputs[p][j];
  }
  std::vector<double> wsq(m);
  for (std::size_t j = 0; j < m; ++j) {
    wsq[j] = params.inverse_lengthscales[j] * params.inverse_lengthscales[j];
  }
  const simd::PointColumns pts{cols.data(), n, m};
  Eigen::MatrixXd k(n, n);
  std::vector<double> row(n);
  for (std::size_t a = 0; a < n; ++a) {
    simd::se_kernel_row(data.inputs[a], pts, wsq, params.signal_variance(), row);
    for (std::size_t b = a; b < n; ++b) k(a, b) = row[b];
  }
  // Mirror the upper triangle so the matrix is exactly symmetric.
  for (std::size_t a = 0; a < n; ++a) {
    k(a, a) = params.signal_variance() + params.noise_variance();
    for (std::size_t b = a + 1; b < n; ++b) k(b, a) = k(a, b);
  }
  if (!k.allFinite()) throw NumericError("gram_matrix: non-finite entries");
  return k;
}

GpModel::GpModel(KernelParams params, PriorMeanFunction prior, Box domain, Dataset data)
    : params_(std::move(params)),
      prior_(std::move(prior)),
      domain_(std::move(domain)),
      data_(std::move(data)) {
  domain_.validate();
  const std::size_t m = domain_.dim();
  params_.validate(m);
  if (prior_.dim() != m) throw InputError("prior dimension does not match the domain");
  if (data_.inputs.size() != data_.outputs.size()) {
    throw InputError("dataset has " + std::to_string(data_.inputs.size()) + " inputs but " +
                     std::to_string(data_.outputs.size()) + " outputs");
  }
  for (std::size_t p = 0; p < data_.size(); ++p) {
    check_point(data_.inputs[p]);
    if (!std::isfinite(data_.outputs[p])) throw InputError("non-finite training output");
  }
  weights_sq_.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    weights_sq_[j] = params_.inverse_lengthscales[j] * params_.inverse_lengthscales[j];
  }
  fresh_ = data_.empty();
}

void GpModel::check_point(std::span<const double> x) const {
  if (x.size() != domain_.dim()) {
    throw InputError("point has dimension " + std::to_string(x.size()) + ", domain has " +
                     std::to_string(domain_.dim()));
  }
  if (!domain_.contains(x)) {
    std::string where;
    for (double v : x) where += (where.empty() ? "" : ", ") + format_double(v);
    throw InputError("training input (" + where + ") lies outside the domain");
  }
}

void GpModel::fit() {
  const std::size_t n = data_.size();
  const std::size_t m = domain_.dim();
  jitter_ = 0.0;
  if (n == 0) {
    columns_.resize(0, static_cast<Eigen::Index>(m));
    gram_.resize(0, 0);
    factor_.resize(0, 0);
    residual_.resize(0);
    alpha_.resize(0);
    fresh_ = true;
    return;
  }
  columns_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  residual_.resize(static_cast<Eigen::Index>(n));
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t j = 0; j < m; ++j) columns_(p, j) = data_.inputs[p][j];
    residual_(p) = data_.outputs[p] - prior_(data_.inputs[p]);
  }

  const Eigen::MatrixXd base = gram_matrix(data_, params_);
  double jitter = 0.0;
  for (int attempt = 0; attempt <= kMaxJitterRetries; ++attempt) {
    if (attempt > 0) {
      jitter = kInitialJitter * params_.signal_variance() * std::pow(10.0, attempt - 1);
    }
    gram_ = base;
    gram_.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(gram_);
    if (llt.info() == Eigen::Success) {
      Eigen::MatrixXd l = llt.matrixL();
      if (l.allFinite()) {
        factor_ = std::move(l);
        jitter_ = jitter;
        alpha_ = llt.solve(residual_);
        if (!alpha_.allFinite()) throw NumericError("GP fit: non-finite weight vector");
        fresh_ = true;
        return;
      }
    }
  }
  fresh_ = false;
  throw NumericError("GP fit: Cholesky factorisation failed for N=" + std::to_string(n) +
                     " after jitter escalation up to " + format_double(jitter));
}

void GpModel::append_observation(std::span<const double> x, double y) {
  check_point(x);
  if (!std::isfinite(y)) throw InputError("non-finite observation");
  data_.inputs.emplace_back(x.begin(), x.end());
  data_.outputs.push_back(y);
  fresh_ = false;
}

void GpModel::require_fresh(const char* what) const {
  if (!fresh_) {
    throw ContractError(std::string(what) + ": model is stale, call fit() after changing data");
  }
}

const Eigen::MatrixXd& GpModel::factor() const {
  require_fresh("factor");
  return factor_;
}

const Eigen::MatrixXd& GpModel::factored_gram() const {
  require_fresh("factored_gram");
  return gram_;
}

const Eigen::VectorXd& GpModel::weights() const {
  require_fresh("weights");
  return alpha_;
}

const Eigen::VectorXd& GpModel::prior_residual() const {
  require_fresh("prior_residual");
  return residual_;
}

double GpModel::inverse_gram_norm() const {
  require_fresh("inverse_gram_norm");
  if (data_.empty()) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram_, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  if (!(lmin > 0.0)) throw NumericError("inverse_gram_norm: Gram matrix not positive definite");
  return 1.0 / lmin;
}

Eigen::VectorXd GpModel::cross_covariance(std::span<const double> x) const {
  require_fresh("cross_covariance");
  if (x.size() != domain_.dim()) throw InputError("query dimension mismatch");
  const std::size_t n = data_.size();
  Eigen::VectorXd k(static_cast<Eigen::Index>(n));
  if (n == 0) return k;
  const simd::PointColumns pts{columns_.data(), n, domain_.dim()};
  simd::se_kernel_row(x, pts, weights_sq_, params_.signal_variance(),
                      {k.data(), static_cast<std::size_t>(n)});
  return k;
}

double GpModel::posterior_mean(std::span<const double> x) const {
  require_fresh("posterior_mean");
  mean_calls_.bump();
  const double prior = prior_(x);
  if (data_.empty()) return prior;
  const Eigen::VectorXd k = cross_covariance(x);
  return prior + simd::dot(as_span(k), as_span(alpha_));
}

double GpModel::posterior_variance(std::span<const double> x) const {
  require_fresh("posterior_variance");
  if (x.size() != domain_.dim()) throw InputError("query dimension mismatch");
  variance_calls_.bump();
  const double kxx = params_.signal_variance();
  if (data_.empty()) return kxx;
  Eigen::VectorXd v = cross_covariance(x);
  factor_.triangularView<Eigen::Lower>().solveInPlace(v);
  const double raw = kxx - simd::dot(as_span(v), as_span(v));
  if (!std::isfinite(raw)) throw NumericError("posterior_variance: non-finite result");
  if (raw < -kNegativeVarianceTolerance * kxx) {
    throw NumericError("posterior_variance: raw value " + format_double(raw) +
                       " is negative beyond round-off");
  }
  return std::clamp(raw, 0.0, kxx);
}

Prediction GpModel::predict(std::span<const double> x, bool with_variance) const {
  Prediction p;
  p.mean = posterior_mean(x);
  if (with_variance) p.variance = posterior_variance(x);
  return p;
}

}  // namespace prigp
