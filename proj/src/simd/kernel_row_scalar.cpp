#include "prigp/simd/kernel_row.hpp"

#include <cmath>

namespace prigp::simd::scalar {

void se_kernel_row(std::span<const double> query, PointColumns points,
                   std::span<const double> weights_sq, double scale,
                   std::span<double> out) {
  const std::size_t n = points.rows;
  for (std::size_t p = 0; p < n; ++p) out[p] = 0.0;
  for (std::size_t j = 0; j < points.cols; ++j) {
    const double* col = points.column(j);
    const double q = query[j];
    const double w = weights_sq[j];
    for (std::size_t p = 0; p < n; ++p) {
      const double d = q - col[p];
      out[p] += w * (d * d);
    }
  }
  for (std::size_t p = 0; p < n; ++p) out[p] = scale * std::exp(-0.5 * out[p]);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace prigp::simd::scalar
