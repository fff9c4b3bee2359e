// Compiled with -mavx2 -mfma. Only reached through the dispatcher after a
// runtime CPU check.

#include <immintrin.h>

#include <cmath>

#include "prigp/simd/kernel_row.hpp"

namespace prigp::simd::avx2 {
namespace {

// Cody-Waite split of ln 2 (fdlibm constants).
constexpr double kLn2Hi = 6.93147180369123816490e-01;
constexpr double kLn2Lo = 1.90821492927058770002e-10;
constexpr double kLog2e = 1.44269504088896338700e+00;
constexpr double kExpLow = -708.39;  // below this 2^n would be subnormal
constexpr double kExpHigh = 709.0;

inline __m256d exp_pd(__m256d x) {
  const __m256d underflow = _mm256_cmp_pd(x, _mm256_set1_pd(kExpLow), _CMP_LT_OQ);
  x = _mm256_min_pd(_mm256_max_pd(x, _mm256_set1_pd(kExpLow)), _mm256_set1_pd(kExpHigh));

  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(kLog2e)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(kLn2Hi), x);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(kLn2Lo), r);

  // Taylor series to degree 13 on |r| <= ln2/2; truncation error < 5e-18.
  __m256d p = _mm256_set1_pd(1.0 / 6227020800.0);
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 479001600.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 39916800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3628800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 362880.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 40320.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5040.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 720.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 120.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 24.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

  // 2^n: recover n as int64 via the 1.5 * 2^52 bias trick, then build the exponent.
  const __m256d magic = _mm256_set1_pd(6755399441055744.0);
  const __m256i ni = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(n, magic)),
                                      _mm256_castpd_si256(magic));
  const __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(ni, _mm256_set1_epi64x(1023)), 52);
  const __m256d result = _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
  return _mm256_andnot_pd(underflow, result);
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

void exp4(const double* in, double* out) {
  _mm256_storeu_pd(out, exp_pd(_mm256_loadu_pd(in)));
}

void se_kernel_row(std::span<const double> query, PointColumns points,
                   std::span<const double> weights_sq, double scale,
                   std::span<double> out) {
  const std::size_t n = points.rows;
  const std::size_t m = points.cols;
  const __m256d vscale = _mm256_set1_pd(scale);
  const __m256d half = _mm256_set1_pd(-0.5);
  std::size_t p = 0;
  for (; p + 4 <= n; p += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t j = 0; j < m; ++j) {
      const __m256d d = _mm256_sub_pd(_mm256_set1_pd(query[j]),
                                      _mm256_loadu_pd(points.column(j) + p));
      acc = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_set1_pd(weights_sq[j]), d), d, acc);
    }
    _mm256_storeu_pd(out.data() + p, _mm256_mul_pd(vscale, exp_pd(_mm256_mul_pd(half, acc))));
  }
  for (; p < n; ++p) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double d = query[j] - points.column(j)[p];
      acc += weights_sq[j] * (d * d);
    }
    out[p] = scale * std::exp(-0.5 * acc);
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i + 4),
                           _mm256_loadu_pd(b.data() + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i), acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace prigp::simd::avx2
