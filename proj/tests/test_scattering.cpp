#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hyk/errors.hpp"
#include "hyk/fit.hpp"
#include "hyk/scattering.hpp"

using namespace hyk;
constexpr double kPi = std::numbers::pi;

namespace {

template <class Fn>
double simpson(Fn f, double a, double b, int n) {
  double h = (b - a) / n, s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// Square well of depth v0 and range R: u = sinh(kappa r) / kappa inside.
struct Well {
  double v0, R, kappa, a, c;
  Well(double v, double r) : v0(v), R(r), kappa(std::sqrt(v / 2.0)) {
    a = R - std::tanh(kappa * R) / kappa;
    c = std::cosh(kappa * R);
  }
  double phi(double r) const { return r <= R ? 1.0 - std::sinh(kappa * r) / (kappa * c * r) : a / r; }
  // 4 pi / p int phi r sin(p r) dr, exterior a/r tail summed in the Abel sense
  double phi_hat(double p) const {
    double in = simpson([&](double r) { return r == 0.0 ? 0.0 : phi(r) * r * std::sin(p * r); }, 0.0, R, 20000);
    return 4.0 * kPi / p * (in + a * std::cos(p * R) / p);
  }
};

}  // namespace

TEST_CASE("square well scattering length") {
  auto sol = solve_zero_energy(RadialPotential::square_well(2.0, 1.0));
  CHECK(std::fabs(sol.a - (1.0 - std::tanh(1.0))) < 1e-8);
  // 40-digit value for V0 = 3, R = 1.5
  auto s2 = solve_zero_energy(RadialPotential::square_well(3.0, 1.5));
  CHECK(std::fabs(s2.a - 0.72390556594242533915) < 1e-8);
}

TEST_CASE("profile matches the closed form inside and outside") {
  Well w(2.0, 1.0);
  auto sol = solve_zero_energy(RadialPotential::square_well(2.0, 1.0));
  for (double r : {0.1, 0.5, 0.9, 1.0, 1.5, 1.9}) {
    CAPTURE(r);
    CHECK(sol.phi_at(r) == doctest::Approx(w.phi(r)).epsilon(1e-8));
  }
  CHECK(sol.phi_at(10.0) == doctest::Approx(w.a / 10.0).epsilon(1e-8));
}

TEST_CASE("integral identities") {
  for (auto v : {RadialPotential::square_well(2.0, 1.0), RadialPotential::truncated_gaussian(5.0, 0.8, 2.5),
                 RadialPotential::tabulated({0.0, 0.5, 1.2}, {3.0, 1.0, 0.0})}) {
    auto sol = solve_zero_energy(v);
    CAPTURE(v.describe());
    CHECK(std::fabs(sol.int_v_f() - 8.0 * kPi * sol.a) < 1e-8 * 8.0 * kPi * sol.a);
    CHECK(energy_identity_residual(sol) < 1e-6);
    CHECK(sol.a > 0.0);
    CHECK(sol.a < sol.support);
  }
}

TEST_CASE("zero potential has zero scattering length") {
  auto sol = solve_zero_energy(RadialPotential::zero());
  CHECK(sol.a == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
}

TEST_CASE("Fourier transform of the profile") {
  Well w(2.0, 1.0);
  auto sol = solve_zero_energy(RadialPotential::square_well(2.0, 1.0));
  for (double p : {0.3, 1.0, 4.0, 12.0}) {
    CAPTURE(p);
    CHECK(fourier_phi(sol, p) == doctest::Approx(w.phi_hat(p)).epsilon(1e-7));
    CHECK(scattering_w(sol, p) == doctest::Approx(2.0 * p * p * w.phi_hat(p)).epsilon(1e-7));
  }
  CHECK(scattering_w(sol, 0.0) == doctest::Approx(8.0 * kPi * sol.a).epsilon(1e-12));
  CHECK(std::isinf(fourier_phi(sol, 0.0)));
}

TEST_CASE("W table interpolation") {
  auto sol = solve_zero_energy(RadialPotential::square_well(2.0, 1.0));
  WTable t(sol, 20.0, 4001);
  for (double p : {0.0, 0.77, 5.5, 19.9}) CHECK(t(p) == doctest::Approx(scattering_w(sol, p)).epsilon(1e-7));
  CHECK(t(25.0) == 0.0);
}

TEST_CASE("cutoff function") {
  CHECK(chi_hat(0.0) == 1.0);
  CHECK(chi_hat(1.0) == 1.0);
  CHECK(chi_hat(1.25) == 0.0);
  CHECK(chi_hat(3.0) == 0.0);
  double prev = 1.0;
  for (int i = 0; i <= 100; ++i) {
    double v = chi_hat(1.0 + 0.0025 * i);
    CHECK(v <= prev + 1e-15);
    CHECK(v >= 0.0);
    prev = v;
  }
}

TEST_CASE("Bethe-Goldstone kernel") {
  Vec3 r{0.1, 0.2, 0.0}, rp{-0.3, 0.0, 0.1}, p{1.5, -0.5, 0.2};
  auto sq = [](const Vec3& x) { return x[0] * x[0] + x[1] * x[1] + x[2] * x[2]; };
  Vec3 rpp{r[0] + p[0], r[1] + p[1], r[2] + p[2]}, rmp{rp[0] - p[0], rp[1] - p[1], rp[2] - p[2]};
  double den = sq(rpp) - sq(r) + sq(rmp) - sq(rp) + 2.0 * 0.05;
  CHECK(bethe_goldstone_kernel_w(3.0, r, rp, p, 0.05) == doctest::Approx(3.0 / den));
  auto sol = solve_zero_energy(RadialPotential::square_well(2.0, 1.0));
  CHECK(bethe_goldstone_kernel(sol, r, rp, p, 0.05) == doctest::Approx(scattering_w(sol, std::sqrt(sq(p))) / den));
  Vec3 z{0, 0, 0};
  CHECK_THROWS_AS(bethe_goldstone_kernel_w(1.0, z, z, z, 0.0), DomainError);
  CHECK_THROWS_AS(bethe_goldstone_kernel_w(1.0, r, rp, p, -1.0), InputError);
}

TEST_CASE("periodic coefficients") {
  auto sol = solve_zero_energy(RadialPotential::square_well(2.0, 1.0));
  auto per = periodize(sol, 12.0, 0.1, 6.0, 1e-3);
  CHECK(per.coeff({0, 0, 0}) == 0.0);
  for (std::array<int, 3> k : {std::array<int, 3>{1, 0, 0}, {1, 1, 1}, {3, 2, 0}}) {
    CHECK(per.coeff(k) == doctest::Approx(per.coeff_lt(k) + per.coeff_gt(k)).epsilon(1e-12));
    double p = 2.0 * kPi / 12.0 * std::sqrt(double(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]));
    CHECK(per.coeff(k) == doctest::Approx(fourier_phi(sol, p)).epsilon(1e-9));
  }
  CHECK(per.present[7] == 0);  // 7 is not a sum of three squares
  CHECK(per.present[6] == 1);
  CHECK(per.w2_tail > 0.0);
  CHECK_THROWS_AS(per.coeff({100, 0, 0}), InputError);
  CHECK_THROWS_AS(periodize(sol, 1.5, 0.1, 6.0, 1e-3), InputError);
  CHECK_THROWS_AS(periodize(sol, 12.0, 0.2, 6.0, 1e-3), InputError);
  CHECK(phi_gt_l1_norm(sol, 1e-3, 0.1) > 0.0);
}

TEST_CASE("grid validation") {
  GridSpec g;
  g.nodes = 1;
  CHECK_THROWS_AS(solve_zero_energy(RadialPotential::square_well(2.0, 1.0), g), InputError);
  GridSpec h;
  h.r_max = 0.5;
  CHECK_THROWS_AS(solve_zero_energy(RadialPotential::square_well(2.0, 1.0), h), InputError);
}

TEST_CASE("pointwise bounds and exterior law on the grid") {
  for (auto pot : {RadialPotential::square_well(2.0, 1.0), RadialPotential::truncated_gaussian(1.0, 1.0, 5.0)}) {
    auto sol = solve_zero_energy(pot);
    for (std::size_t i = 1; i < sol.r.size(); ++i) {
      double r = sol.r[i], ph = sol.phi[i];
      CHECK(ph >= 0.0);
      CHECK(ph <= std::min(1.0, sol.a / r) + 1e-12);
      if (r > sol.support) CHECK(std::fabs(ph * r - sol.a) < 1e-8);
    }
  }
}

TEST_CASE("energy identity converges at least at second order") {
  std::vector<double> res;
  for (int n : {4, 8, 16, 32}) {
    GridSpec g;
    g.nodes = n;
    g.rtol = 1e-13;
    res.push_back(energy_identity_residual(solve_zero_energy(RadialPotential::square_well(2.0, 1.0), g)));
  }
  for (std::size_t i = 0; i + 1 < res.size(); ++i) {
    CAPTURE(i);
    CHECK(res[i] / res[i + 1] >= 4.0);
  }
  CHECK(energy_identity_residual(solve_zero_energy(RadialPotential::zero())) == 0.0);
}

TEST_CASE("low-momentum behaviour of the transform") {
  auto sol = solve_zero_energy(RadialPotential::square_well(2.0, 1.0));
  // 8 pi a - 2 p^2 phi_hat(p) = C p^2 + O(p^4), C > 0
  std::vector<double> c;
  for (double p : {1e-3, 1e-2, 0.1}) {
    double d = 8.0 * kPi * sol.a - 2.0 * p * p * fourier_phi(sol, p);
    CHECK(d >= 0.0);
    c.push_back(d / (p * p));
  }
  CHECK(c[0] > 0.0);
  CHECK(c[1] == doctest::Approx(c[0]).epsilon(1e-3));
  std::vector<std::pair<double, double>> pts;
  for (double p : {1e-3, 3e-3, 1e-2, 3e-2}) pts.emplace_back(p, fourier_phi(sol, p));
  CHECK(std::fabs(loglog_fit(pts).slope + 2.0) <= 0.1);
  CHECK_THROWS_AS(fourier_phi(sol, -1.0), InputError);
}

TEST_CASE("high-momentum decay of the transform") {
  // |phi_hat| <= C / p^2 with C = sup W / 2; a bounded V decays faster
  auto sol = solve_zero_energy(RadialPotential::square_well(2.0, 1.0));
  double C = 4.0 * kPi * sol.a;
  std::vector<std::pair<double, double>> pts;
  for (double p : {20.0, 40.0, 80.0, 160.0}) {
    CHECK(std::fabs(fourier_phi(sol, p)) <= C / (p * p));
    pts.emplace_back(p, std::fabs(fourier_phi(sol, p)));
  }
  CHECK(loglog_fit(pts).slope <= -2.0);
  auto z = solve_zero_energy(RadialPotential::zero());
  for (double p : {0.5, 5.0}) CHECK(fourier_phi(z, p) == 0.0);
}

TEST_CASE("Bethe-Goldstone limits") {
  auto sol = solve_zero_energy(RadialPotential::square_well(2.0, 1.0));
  Vec3 z{0, 0, 0};
  for (double p : {5.0, 20.0}) {
    Vec3 pv{0, 0, p};
    CHECK(bethe_goldstone_kernel(sol, z, z, pv, 0.0) == doctest::Approx(fourier_phi(sol, p)).epsilon(1e-12));
  }
  Vec3 r{0.3, 0, 0}, rp{-0.2, 0.1, 0}, ps{1e-3, 2e-3, 0};
  double den = 2.0 * (ps[0] * ps[0] + ps[1] * ps[1]) + 2.0 * (r[0] * ps[0] - rp[0] * ps[0] - rp[1] * ps[1]) + 0.2;
  CHECK(bethe_goldstone_kernel(sol, r, rp, ps, 0.1) == doctest::Approx(8.0 * kPi * sol.a / den).epsilon(1e-5));
  Vec3 p{1.0, 0.5, 0};
  CHECK(std::fabs(bethe_goldstone_kernel(sol, r, rp, p, 0.2)) < std::fabs(bethe_goldstone_kernel(sol, r, rp, p, 0.1)));
}

TEST_CASE("high-momentum part scales like rho^(-2/3 + 2 gamma)") {
  auto sol = solve_zero_energy(RadialPotential::square_well(2.0, 1.0));
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < 5; ++i) {
    double rho = 1e-4 * std::pow(10.0, i / 4.0);
    pts.emplace_back(rho, phi_gt_l1_norm(sol, rho, 0.1));
  }
  CHECK(std::fabs(loglog_fit(pts).slope - (-2.0 / 3.0 + 0.2)) <= 0.05);
}

TEST_CASE("periodized equation error shrinks with the box") {
  // Images of a / r contribute a (G_L - 1/r); at r = 0 this is -2.837297 a / L
  // for the simple cubic lattice (zero-mean Coulomb kernel).
  auto sol = solve_zero_energy(RadialPotential::square_well(2.0, 1.0));
  double prev = 1e300;
  for (double L : {4.0, 8.0, 16.0, 32.0}) {
    double e = periodic_scattering_error(sol, L);
    CHECK(e < prev);
    prev = e;
  }
  CHECK(64.0 * periodic_scattering_error(sol, 64.0) / sol.a == doctest::Approx(2.837297).epsilon(1e-3));
  CHECK(periodic_scattering_error(solve_zero_energy(RadialPotential::zero()), 10.0) == 0.0);
  CHECK_THROWS_AS(periodic_scattering_error(sol, 1.5), InputError);
}
