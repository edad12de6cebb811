#pragma once

namespace hyk {

struct SpinDensities {
  double rho_up = 0.0;
  double rho_down = 0.0;

  SpinDensities() = default;
  SpinDensities(double up, double down);
  static SpinDensities symmetric(double rho) { return {0.5 * rho, 0.5 * rho}; }

  double total() const { return rho_up + rho_down; }
  double kf_up() const;
  double kf_down() const;
};

// k_F = (6 pi^2 rho_sigma)^(1/3).
double fermi_momentum(double rho_sigma);
// Inverse: rho_sigma = k^3 / (6 pi^2).
double density_from_kf(double k);

// Third-order function F(x), x >= 0. Inside |1 - x^(1/3)| < 1e-6 the
// logarithmic term is evaluated in factored form.
double F(double x);
// Same bracket without the factored-form fallback; diverges to NaN at x = 1.
double F_direct(double x);
// Factored-form evaluation, valid for every x >= 0.
double F_factored(double x);
// (48/35)(11 - 2 log 2)(6 pi^2)^(1/3).
double F_at_one_closed_form();

struct EnergyBreakdown {
  double kinetic = 0.0;
  double second_order = 0.0;
  double third_order = 0.0;
  double total = 0.0;
};

EnergyBreakdown huang_yang_energy(const SpinDensities& d, double a);
double lss_second_order(const SpinDensities& d, double a);

}  // namespace hyk
