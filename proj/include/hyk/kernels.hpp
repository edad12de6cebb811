#pragma once

#include <cstddef>
#include <string>

namespace hyk::kernels {

// sum_j w[j] / ((a + b[j]) + shift), accumulated in four lanes (lane j % 4)
// and combined as (l0 + l1) + (l2 + l3). Every variant uses this exact order,
// so all variants return bit-identical results.
double row_reciprocal_sum_scalar(double a, const double* b, const double* w, std::size_t n, double shift);
#if defined(HYK_HAVE_AVX2)
double row_reciprocal_sum_avx2(double a, const double* b, const double* w, std::size_t n, double shift);
#endif
#if defined(HYK_HAVE_NEON)
double row_reciprocal_sum_neon(double a, const double* b, const double* w, std::size_t n, double shift);
#endif

enum class Variant { scalar, avx2, neon };

// Selected once from CPU features; HYK_SIMD=scalar forces the reference path.
Variant active_variant();
void force_variant(Variant v);  // throws if the variant is unavailable
bool variant_available(Variant v);
std::string variant_name(Variant v);

double row_reciprocal_sum(double a, const double* b, const double* w, std::size_t n, double shift);

}  // namespace hyk::kernels
