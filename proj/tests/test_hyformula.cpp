#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hyk/errors.hpp"
#include "hyk/hyformula.hpp"

using namespace hyk;

namespace {

// F(x) evaluated in 40-digit arithmetic, outside the library.
struct Frozen {
  double x, F;
};
constexpr Frozen kF[] = {
    {0.125, 5.6750509203170540348},   {0.25, 11.439877438729411335},   {0.5, 23.657051154729104684},
    {2.0, 119.22406691313206048},     {4.0, 290.55477569002142377},    {8.0, 726.40651780058291645},
    {0.999999, 51.390223363370063515}, {1.000001, 51.390343274031140461}, {1e-3, 0.04661577574779169558},
    {100.0, 21439.117478711034465},
};
constexpr double kF1 = 51.390283318691813984;

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

}  // namespace

TEST_CASE("F at one: formula and closed form") {
  CHECK(rel(F(1.0), kF1) < 1e-13);
  CHECK(rel(F_at_one_closed_form(), kF1) < 1e-14);
  CHECK(rel(F_factored(1.0), F_at_one_closed_form()) < 1e-12);
}

TEST_CASE("F against high-precision values") {
  for (const auto& f : kF) {
    CAPTURE(f.x);
    CHECK(rel(F(f.x), f.F) < 1e-12);
  }
}

TEST_CASE("direct and factored forms agree away from one") {
  for (double x : {0.01, 0.3, 0.7, 1.5, 3.0, 50.0}) {
    CAPTURE(x);
    CHECK(rel(F_direct(x), F_factored(x)) < 1e-13);
  }
}

TEST_CASE("direct form breaks down at one") {
  CHECK_FALSE(std::isfinite(F_direct(1.0)));
}

TEST_CASE("reciprocal symmetry") {
  double worst = 0.0;
  for (double x : {0.125, 0.25, 0.5, 2.0, 4.0, 8.0})
    worst = std::max(worst, std::fabs(F(x) - std::pow(x, 7.0 / 3.0) * F(1.0 / x)) / F(x));
  CHECK(worst <= 1e-10);
}

TEST_CASE("F is nonnegative and smooth through one") {
  CHECK(F(0.0) == 0.0);
  for (int i = 1; i <= 10000; ++i) CHECK(F(i * 0.01) >= 0.0);
  // no jump where F switches evaluation form
  double h = 2e-6;
  double left = F(1.0 - h), right = F(1.0 + h), mid = F(1.0);
  CHECK(std::fabs(0.5 * (left + right) - mid) < 1e-9 * mid);
}

TEST_CASE("F rejects negative or NaN input") {
  CHECK_THROWS_AS(F(-1.0), InputError);
  CHECK_THROWS_AS(F(std::nan("")), InputError);
}

TEST_CASE("symmetric energy matches the half-density form") {
  // 40-digit reference for rho = 1e-3, a = 0.2384
  auto e = huang_yang_energy(SpinDensities::symmetric(1e-3), 0.2384);
  CHECK(rel(e.kinetic, 5.7424680003763836319e-05) < 1e-13);
  CHECK(rel(e.second_order, 1.4979113772316134161e-06) < 1e-13);
  CHECK(rel(e.third_order, 5.7954904018329038339e-08) < 1e-12);
  CHECK(rel(e.total, e.kinetic + e.second_order + e.third_order) < 1e-15);
}

TEST_CASE("asymmetric energy") {
  SpinDensities d(2e-4, 1e-4);
  double a = 0.5;
  auto e = huang_yang_energy(d, a);
  const double c = 0.6 * std::pow(6.0 * std::numbers::pi * std::numbers::pi, 2.0 / 3.0);
  CHECK(rel(e.kinetic, c * (std::pow(2e-4, 5.0 / 3.0) + std::pow(1e-4, 5.0 / 3.0))) < 1e-14);
  CHECK(rel(e.second_order, 8.0 * std::numbers::pi * a * 2e-8) < 1e-14);
  CHECK(rel(e.third_order, a * a * std::pow(2e-4, 7.0 / 3.0) * kF[2].F) < 1e-12);
  // swapping spins leaves the energy unchanged
  auto s = huang_yang_energy(SpinDensities(1e-4, 2e-4), a);
  CHECK(rel(s.third_order, e.third_order) < 1e-12);
  CHECK(lss_second_order(d, a) == doctest::Approx(e.kinetic + e.second_order).epsilon(1e-15));
}

TEST_CASE("fully polarized gas has no interaction terms") {
  auto e = huang_yang_energy(SpinDensities(1e-3, 0.0), 1.0);
  CHECK(e.second_order == 0.0);
  CHECK(e.third_order == 0.0);
}

TEST_CASE("Fermi momentum round trip") {
  for (double k : {0.1, 1.0, 3.7}) CHECK(rel(fermi_momentum(density_from_kf(k)), k) < 1e-14);
  CHECK_THROWS_AS(fermi_momentum(-1.0), InputError);
  CHECK_THROWS_AS(SpinDensities(-1.0, 1.0), InputError);
  CHECK_THROWS_AS(huang_yang_energy(SpinDensities(1, 1), -0.1), InputError);
}
