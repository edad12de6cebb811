#include "hyk/hyformula.hpp"

#include <cmath>
#include <numbers>

#include "hyk/errors.hpp"

namespace hyk {

namespace {

constexpr long double kPiL = std::numbers::pi_v<long double>;
constexpr double kPi = std::numbers::pi;

// Neumaier compensated accumulator.
struct CompensatedSum {
  long double sum = 0.0L, c = 0.0L;
  void add(long double v) {
    long double t = sum + v;
    if (std::fabs(sum) >= std::fabs(v))
      c += (sum - t) + v;
    else
      c += (v - t) + sum;
    sum = t;
  }
  long double value() const { return sum + c; }
};

long double prefactor() { return std::cbrt(6.0L * kPiL * kPiL) / 35.0L; }

// Everything but the 21 P(t) log(|1-t|/(1+t)) term.
CompensatedSum smooth_part(long double x, long double t) {
  long double t2 = t * t, t4 = t2 * t2, t5 = t4 * t, x73 = t4 * t2 * t;
  CompensatedSum s;
  s.add(16.0L * x73 * std::log(x));
  s.add(-48.0L * (x73 + 1.0L) * std::log1p(t));
  s.add(6.0L * 15.0L * t);
  s.add(-6.0L * 4.0L * t2);
  s.add(6.0L * 33.0L * x);
  s.add(6.0L * 33.0L * t4);
  s.add(-6.0L * 4.0L * t5);
  s.add(6.0L * 15.0L * x * x);
  return s;
}

void check_x(double x) {
  if (!(x >= 0.0)) throw InputError("F needs x >= 0");
}

}  // namespace

SpinDensities::SpinDensities(double up, double down) : rho_up(up), rho_down(down) {
  if (!(up >= 0.0) || !(down >= 0.0)) throw InputError("densities must be >= 0");
}

double fermi_momentum(double rho_sigma) {
  if (!(rho_sigma >= 0.0)) throw InputError("density must be >= 0");
  return std::cbrt(6.0 * kPi * kPi * rho_sigma);
}

double density_from_kf(double k) { return k * k * k / (6.0 * kPi * kPi); }

double SpinDensities::kf_up() const { return fermi_momentum(rho_up); }
double SpinDensities::kf_down() const { return fermi_momentum(rho_down); }

double F_direct(double x) {
  check_x(x);
  if (x == 0.0) return 0.0;
  long double xl = x, t = std::cbrt(xl);
  long double t2 = t * t;
  long double P = 1.0L - 6.0L * t2 + 5.0L * xl + 5.0L * t2 * t2 - 6.0L * t2 * t2 * t + xl * xl * t;
  CompensatedSum s = smooth_part(xl, t);
  s.add(21.0L * P * std::log(std::fabs(1.0L - t) / (1.0L + t)));
  return static_cast<double>(prefactor() * s.value());
}

double F_factored(double x) {
  check_x(x);
  if (x == 0.0) return 0.0;
  long double xl = x, t = std::cbrt(xl);
  CompensatedSum s = smooth_part(xl, t);
  // 1 - 6t^2 + 5t^3 + 5t^4 - 6t^5 + t^7 = (1-t)^4 (t^3 + 4t^2 + 4t + 1)
  long double d = 1.0L - t;
  if (d != 0.0L) {
    long double d4 = d * d * d * d;
    long double c = ((t + 4.0L) * t + 4.0L) * t + 1.0L;
    s.add(21.0L * d4 * c * (std::log(std::fabs(d)) - std::log1p(t)));
  }
  return static_cast<double>(prefactor() * s.value());
}

double F(double x) {
  check_x(x);
  if (x == 0.0) return 0.0;
  double t = std::cbrt(x);
  if (std::fabs(1.0 - t) < 1e-6) return F_factored(x);
  return F_direct(x);
}

double F_at_one_closed_form() {
  long double v = 48.0L / 35.0L * (11.0L - 2.0L * std::log(2.0L)) * std::cbrt(6.0L * kPiL * kPiL);
  return static_cast<double>(v);
}

EnergyBreakdown huang_yang_energy(const SpinDensities& d, double a) {
  if (!(a >= 0.0)) throw InputError("scattering length must be >= 0");
  if (!(d.rho_up >= 0.0) || !(d.rho_down >= 0.0)) throw InputError("densities must be >= 0");
  EnergyBreakdown e;
  double c = 0.6 * std::pow(6.0 * kPi * kPi, 2.0 / 3.0);
  e.kinetic = c * (std::pow(d.rho_up, 5.0 / 3.0) + std::pow(d.rho_down, 5.0 / 3.0));
  e.second_order = 8.0 * kPi * a * d.rho_up * d.rho_down;
  double hi = d.rho_up, lo = d.rho_down;
  // rho_up^(7/3) F(rho_down/rho_up) = rho_down^(7/3) F(rho_up/rho_down); use
  // the orientation with argument <= 1 so rho_up = 0 is handled too.
  if (lo > hi) std::swap(hi, lo);
  e.third_order = hi > 0.0 ? a * a * std::pow(hi, 7.0 / 3.0) * F(lo / hi) : 0.0;
  e.total = e.kinetic + e.second_order + e.third_order;
  return e;
}

double lss_second_order(const SpinDensities& d, double a) {
  EnergyBreakdown e = huang_yang_energy(d, a);
  return e.kinetic + e.second_order;
}

}  // namespace hyk
