#pragma once
// Data-parallel inner loops of the GP: squared-exponential kernel rows and
// dot products. A scalar reference variant is always built; an AVX2+FMA
// variant is compiled on x86-64 and selected at runtime when the CPU supports
// it. Setting PRIGP_SIMD=scalar in the environment pins the scalar path.

#include <cstddef>
#include <span>
#include <string_view>

namespace prigp::simd {

enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa);

/// Best ISA supported by this CPU and binary (ignores the env override).
Isa detect_isa();

/// ISA in use by the dispatching entry points below.
Isa active_isa();

/// Pin the dispatch to `isa`. Falls back to scalar if `isa` is unavailable.
/// Returns the ISA actually selected. Intended for tests and benchmarks.
Isa set_active_isa(Isa isa);

/// Column-major view of N training inputs in R^m: column j holds coordinate j
/// of every point, contiguous, so the kernel row loop streams over points.
struct PointColumns {
  const double* data = nullptr;
  std::size_t rows = 0;  // N
  std::size_t cols = 0;  // m
  const double* column(std::size_t j) const { return data + j * rows; }
};

/// out[p] = scale * exp(-0.5 * sum_j weights_sq[j] * (query[j] - X(p, j))^2)
///
/// `weights_sq` are the squared inverse lengthscales l_j^2.
void se_kernel_row(std::span<const double> query, PointColumns points,
                   std::span<const double> weights_sq, double scale,
                   std::span<double> out);

double dot(std::span<const double> a, std::span<const double> b);

namespace scalar {
void se_kernel_row(std::span<const double> query, PointColumns points,
                   std::span<const double> weights_sq, double scale,
                   std::span<double> out);
double dot(std::span<const double> a, std::span<const double> b);
}  // namespace scalar

#if defined(PRIGP_HAVE_AVX2)
namespace avx2 {
void se_kernel_row(std::span<const double> query, PointColumns points,
                   std::span<const double> weights_sq, double scale,
                   std::span<double> out);
double dot(std::span<const double> a, std::span<const double> b);

// Vectorised exp on 4 lanes, exposed for equivalence tests. Inputs below
// about -708.39 flush to 0 instead of producing subnormals.
void exp4(const double* in, double* out);
}  // namespace avx2
#endif

}  // namespace prigp::simd
