#include <atomic>
#include <cstdlib>
#include <cstring>

#include "prigp/simd/kernel_row.hpp"

namespace prigp::simd {
namespace {

Isa initial_isa() {
  const char* env = std::getenv("PRIGP_SIMD");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) return Isa::kScalar;
  return detect_isa();
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

Isa detect_isa() {
#if defined(PRIGP_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Isa::kAvx2;
#endif
  return Isa::kScalar;
}

Isa active_isa() { return active().load(std::memory_order_relaxed); }

Isa set_active_isa(Isa isa) {
  if (isa == Isa::kAvx2 && detect_isa() != Isa::kAvx2) isa = Isa::kScalar;
  active().store(isa, std::memory_order_relaxed);
  return isa;
}

void se_kernel_row(std::span<const double> query, PointColumns points,
                   std::span<const double> weights_sq, double scale,
                   std::span<double> out) {
#if defined(PRIGP_HAVE_AVX2)
  if (active_isa() == Isa::kAvx2) {
    avx2::se_kernel_row(query, points, weights_sq, scale, out);
    return;
  }
#endif
  scalar::se_kernel_row(query, points, weights_sq, scale, out);
}

double dot(std::span<const double> a, std::span<const double> b) {
#if defined(PRIGP_HAVE_AVX2)
  if (active_isa() == Isa::kAvx2) return avx2::dot(a, b);
#endif
  return scalar::dot(a, b);
}

}  // namespace prigp::simd
