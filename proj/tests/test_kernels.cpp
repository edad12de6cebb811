#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <random>
#include <vector>

#include "hyk/errors.hpp"
#include "hyk/kernels.hpp"

using namespace hyk::kernels;

namespace {

// Plain lane-ordered loop written independently of the library.
double lane_reference(double a, const std::vector<double>& b, const std::vector<double>& w, double shift) {
  double l[4] = {0, 0, 0, 0};
  for (std::size_t j = 0; j < b.size(); ++j) l[j % 4] += w[j] / ((a + b[j]) + shift);
  return (l[0] + l[1]) + (l[2] + l[3]);
}

bool same_bits(double x, double y) { return std::memcmp(&x, &y, sizeof x) == 0; }

}  // namespace

TEST_CASE("scalar kernel follows the documented summation order") {
  std::mt19937_64 g(7);
  std::uniform_real_distribution<double> u(0.5, 50.0);
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 17u, 1000u}) {
    std::vector<double> b(n), w(n);
    for (std::size_t j = 0; j < n; ++j) {
      b[j] = u(g);
      w[j] = u(g);
    }
    double a = u(g), s = 0.02;
    CAPTURE(n);
    CHECK(same_bits(row_reciprocal_sum_scalar(a, b.data(), w.data(), n, s), lane_reference(a, b, w, s)));
  }
}

TEST_CASE("vector variants are bit-identical to scalar") {
  std::mt19937_64 g(11);
  std::uniform_real_distribution<double> u(-3.0, 40.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t n = static_cast<std::size_t>(g() % 300);
    std::vector<double> b(n), w(n);
    for (std::size_t j = 0; j < n; ++j) {
      b[j] = u(g) + 50.0;
      w[j] = static_cast<double>(g() % 97);
    }
    double a = u(g), s = 1e-3 * static_cast<double>(trial);
    double ref = row_reciprocal_sum_scalar(a, b.data(), w.data(), n, s);
#if defined(HYK_HAVE_AVX2)
    if (variant_available(Variant::avx2)) CHECK(same_bits(row_reciprocal_sum_avx2(a, b.data(), w.data(), n, s), ref));
#endif
#if defined(HYK_HAVE_NEON)
    CHECK(same_bits(row_reciprocal_sum_neon(a, b.data(), w.data(), n, s), ref));
#endif
    CHECK(same_bits(row_reciprocal_sum(a, b.data(), w.data(), n, s), ref));
  }
}

TEST_CASE("dispatch can be forced to the reference path") {
  Variant before = active_variant();
  force_variant(Variant::scalar);
  CHECK(active_variant() == Variant::scalar);
  CHECK(variant_name(Variant::scalar) == "scalar");
  if (!variant_available(Variant::neon)) CHECK_THROWS_AS(force_variant(Variant::neon), hyk::InputError);
  force_variant(before);
}
