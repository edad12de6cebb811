#include "hyk/kernels.hpp"

namespace hyk::kernels {

double row_reciprocal_sum_scalar(double a, const double* b, const double* w, std::size_t n, double shift) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t j = 0; j < n; ++j) {
    double t = a + b[j];
    t = t + shift;
    acc[j & 3] = acc[j & 3] + w[j] / t;
  }
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

}  // namespace hyk::kernels
