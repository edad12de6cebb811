#include <atomic>
#include <cstdlib>
#include <cstring>

#include "hyk/errors.hpp"
#include "hyk/kernels.hpp"

namespace hyk::kernels {

namespace {

Variant detect() {
  if (const char* env = std::getenv("HYK_SIMD"))
    if (std::strcmp(env, "scalar") == 0) return Variant::scalar;
#if defined(HYK_HAVE_AVX2)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2")) return Variant::avx2;
#endif
#if defined(HYK_HAVE_NEON)
  return Variant::neon;
#endif
  return Variant::scalar;
}

std::atomic<int>& current() {
  static std::atomic<int> v{static_cast<int>(detect())};
  return v;
}

}  // namespace

bool variant_available(Variant v) {
  switch (v) {
    case Variant::scalar:
      return true;
    case Variant::avx2:
#if defined(HYK_HAVE_AVX2)
      __builtin_cpu_init();
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Variant::neon:
#if defined(HYK_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Variant active_variant() { return static_cast<Variant>(current().load()); }

void force_variant(Variant v) {
  if (!variant_available(v)) throw InputError("SIMD variant not available: " + variant_name(v));
  current().store(static_cast<int>(v));
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::scalar:
      return "scalar";
    case Variant::avx2:
      return "avx2";
    case Variant::neon:
      return "neon";
  }
  return "unknown";
}

double row_reciprocal_sum(double a, const double* b, const double* w, std::size_t n, double shift) {
  switch (active_variant()) {
#if defined(HYK_HAVE_AVX2)
    case Variant::avx2:
      return row_reciprocal_sum_avx2(a, b, w, n, shift);
#endif
#if defined(HYK_HAVE_NEON)
    case Variant::neon:
      return row_reciprocal_sum_neon(a, b, w, n, shift);
#endif
    default:
      return row_reciprocal_sum_scalar(a, b, w, n, shift);
  }
}

}  // namespace hyk::kernels
