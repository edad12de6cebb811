#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "hyk/errors.hpp"
#include "hyk/potential.hpp"

using namespace hyk;
constexpr double kPi = std::numbers::pi;

namespace {

// Composite Simpson on [a, b] with n (even) panels.
template <class Fn>
double simpson(Fn f, double a, double b, int n) {
  double h = (b - a) / n, s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("square well transform") {
  auto v = RadialPotential::square_well(2.0, 1.5);
  CHECK(v_hat_zero(v) == doctest::Approx(4.0 * kPi / 3.0 * 2.0 * 1.5 * 1.5 * 1.5).epsilon(1e-12));
  for (double p : {0.1, 1.0, 3.3, 10.0}) {
    double x = p * 1.5;
    double exact = 4.0 * kPi * 2.0 * (std::sin(x) - x * std::cos(x)) / (p * p * p);
    CAPTURE(p);
    CHECK(v_hat(v, p) == doctest::Approx(exact).epsilon(1e-10));
  }
  CHECK(v_hat(v, 0.0) == doctest::Approx(v_hat_zero(v)).epsilon(1e-12));
}

TEST_CASE("truncated gaussian transform") {
  auto v = RadialPotential::truncated_gaussian(3.0, 0.7, 2.0);
  double z = 4.0 * kPi * simpson([&](double r) { return v.eval(r) * r * r; }, 0.0, 2.0, 4000);
  CHECK(v_hat_zero(v) == doctest::Approx(z).epsilon(1e-10));
  for (double p : {0.5, 2.0, 7.0}) {
    double ref = 4.0 * kPi / p * simpson([&](double r) { return std::sin(p * r) * v.eval(r) * r; }, 0.0, 2.0, 4000);
    CAPTURE(p);
    CHECK(v_hat(v, p) == doctest::Approx(ref).epsilon(1e-9));
  }
  CHECK(v.eval(2.0 + 1e-12) == 0.0);
  CHECK(v.eval(0.0) == 3.0);
}

TEST_CASE("tabulated potential interpolates and loads from file") {
  auto v = RadialPotential::tabulated({0.0, 1.0, 2.0}, {4.0, 2.0, 0.0});
  CHECK(v.eval(0.5) == doctest::Approx(3.0));
  CHECK(v.eval(1.5) == doctest::Approx(1.0));
  CHECK(v.eval(3.0) == 0.0);
  CHECK(v.support_radius() == 2.0);
  // int_0^2 V r^2 dr for the hat: int_0^2 (4 - 2 r) r^2 dr = 32/3 - 8 = 8/3
  CHECK(v_hat_zero(v) == doctest::Approx(4.0 * kPi * 8.0 / 3.0).epsilon(1e-12));

  std::string path = "potential_table_test.txt";
  {
    std::ofstream f(path);
    f << "# r V\n0 4\n1 2\n\n2 0\n";
  }
  auto w = RadialPotential::load_table(path);
  CHECK(w.eval(0.5) == doctest::Approx(3.0));
  std::remove(path.c_str());
  CHECK_THROWS_AS(RadialPotential::load_table("does/not/exist"), InputError);
}

TEST_CASE("breakpoints and scaling") {
  auto v = RadialPotential::square_well(2.0, 1.0);
  auto b = v.breakpoints();
  REQUIRE(!b.empty());
  CHECK(b.back() == 1.0);
  auto s = v.scaled(0.5);
  CHECK(s.eval(0.5) == 1.0);
  CHECK(v_hat_zero(s) == doctest::Approx(0.5 * v_hat_zero(v)));
  CHECK(!v.describe().empty());
  CHECK(v_hat_zero(RadialPotential::zero()) == 0.0);
}

TEST_CASE("soft-sphere ladder") {
  auto l = soft_sphere_ladder(1.0, 10.0, 4.0, 3);
  REQUIRE(l.size() == 3);
  CHECK(l[0].eval(0.5) == doctest::Approx(10.0));
  CHECK(l[2].eval(0.5) == doctest::Approx(160.0));
  CHECK(l[1].support_radius() == 1.0);
  CHECK_THROWS_AS(soft_sphere_ladder(1.0, 10.0, 1.0, 3), InputError);
}

TEST_CASE("invalid potentials are rejected") {
  CHECK_THROWS_AS(RadialPotential::square_well(-1.0, 1.0), InputError);
  CHECK_THROWS_AS(RadialPotential::square_well(1.0, 0.0), InputError);
  CHECK_THROWS_AS(RadialPotential::truncated_gaussian(1.0, -1.0, 1.0), InputError);
  CHECK_THROWS_AS(RadialPotential::tabulated({0.0, 1.0}, {1.0, -1.0}), InputError);
  CHECK_THROWS_AS(RadialPotential::tabulated({0.0, 0.0}, {1.0, 1.0}), InputError);
  CHECK_THROWS_AS(RadialPotential::square_well(1.0, 1.0).scaled(-2.0), InputError);
  CHECK_THROWS_AS(v_hat(RadialPotential::square_well(1.0, 1.0), -1.0), InputError);
}
