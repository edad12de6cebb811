#include <immintrin.h>

#include "hyk/kernels.hpp"

namespace hyk::kernels {

double row_reciprocal_sum_avx2(double a, const double* b, const double* w, std::size_t n, double shift) {
  const __m256d va = _mm256_set1_pd(a), vs = _mm256_set1_pd(shift);
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d t = _mm256_add_pd(va, _mm256_loadu_pd(b + j));
    t = _mm256_add_pd(t, vs);
    acc = _mm256_add_pd(acc, _mm256_div_pd(_mm256_loadu_pd(w + j), t));
  }
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (; j < n; ++j) {
    double t = a + b[j];
    t = t + shift;
    lane[j & 3] = lane[j & 3] + w[j] / t;
  }
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

}  // namespace hyk::kernels
