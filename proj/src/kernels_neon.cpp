#include <arm_neon.h>

#include "hyk/kernels.hpp"

namespace hyk::kernels {

double row_reciprocal_sum_neon(double a, const double* b, const double* w, std::size_t n, double shift) {
  const float64x2_t va = vdupq_n_f64(a), vs = vdupq_n_f64(shift);
  float64x2_t lo = vdupq_n_f64(0.0), hi = vdupq_n_f64(0.0);  // lanes 0,1 and 2,3
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    float64x2_t t0 = vaddq_f64(vaddq_f64(va, vld1q_f64(b + j)), vs);
    float64x2_t t1 = vaddq_f64(vaddq_f64(va, vld1q_f64(b + j + 2)), vs);
    lo = vaddq_f64(lo, vdivq_f64(vld1q_f64(w + j), t0));
    hi = vaddq_f64(hi, vdivq_f64(vld1q_f64(w + j + 2), t1));
  }
  double lane[4] = {vgetq_lane_f64(lo, 0), vgetq_lane_f64(lo, 1), vgetq_lane_f64(hi, 0), vgetq_lane_f64(hi, 1)};
  for (; j < n; ++j) {
    double t = a + b[j];
    t = t + shift;
    lane[j & 3] = lane[j & 3] + w[j] / t;
  }
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

}  // namespace hyk::kernels
