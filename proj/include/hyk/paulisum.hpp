#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hyk/hyformula.hpp"
#include "hyk/scattering.hpp"

namespace hyk {

struct MCParams {
  std::uint64_t samples = 1000000;  // rounded up to a multiple of strata^2
  std::uint64_t seed = 0x243f6a8885a308d3ULL;
  int strata = 8;        // equal-volume shells per ball
  int n_theta = 16;      // Gauss-Legendre nodes in cos(theta)
  int n_phi = 32;        // uniform nodes in azimuth
  std::size_t chunk = 2048;  // samples per work unit
};

struct StratumStat {
  int i_up = 0, i_down = 0;
  double mean = 0.0, std_error = 0.0;
  std::uint64_t n = 0;
};

struct MCEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;
  std::vector<StratumStat> breakdown;
};

// rho_up^(7/3) F(rho_down / rho_up) for balls of radii k_up, k_down.
double pauli_closed_form(double k_up, double k_down);

// G(k_up, k_down; eps): Monte Carlo over (r, r'), per-sample rotated angular
// rule, radial p-integral in closed form.
MCEstimate pauli_blocked_integral(double k_up, double k_down, double eps, const MCParams& mc = {});

// Ball cross-section integrals at fixed |p|:
//   pauli(p) = int_{B_up} dr int_{B_down} dr' 1_allowed / (lambda + lambda' + 2 eps)
//   b(p)     = vol_up vol_down / (2 p^2) - pauli(p)
double pauli_profile(double k_up, double k_down, double eps, double p);
double pauli_profile_b(double k_up, double k_down, double eps, double p);

// Deterministic G from the profile: (4 pi / (8 pi^7)) int p^2 b(p) dp.
double pauli_blocked_integral_profile(double k_up, double k_down, double eps);

// Angular average at fixed (r, r') and |p| = s of 1/(2 s^2) - 1_allowed / D.
double angular_integrand(const Vec3& r, const Vec3& rp, double k_up, double k_down, double eps, double s,
                         int n_theta = 32, int n_phi = 64);
// Log-log slope of |angular_integrand| over s in [s_lo, s_hi].
double angular_tail_exponent(const Vec3& r, const Vec3& rp, double k_up, double k_down, double eps,
                             double s_lo, double s_hi);

enum class CorrMethod { profile, monte_carlo };

struct CorrResult {
  std::string method;
  double value = 0.0;        // rho_up rho_down int V(1-phi^2) - (2 pi)^-9 int W^2 (Pauli) / D
  double std_error = 0.0;    // MC only; quadrature error otherwise
  double second_term = 0.0;  // the subtracted lattice-type integral, sign included
  double reference = 0.0;    // 8 pi a rho_up rho_down + a^2 rho_up^(7/3) F(rho_down / rho_up)
  double deficit = 0.0;      // value - reference
  double deficit_error = 0.0;
  std::uint64_t n_samples = 0;
};

CorrResult corr_constant(const ScatteringSolution& sol, const SpinDensities& d, double eps,
                         CorrMethod method = CorrMethod::profile, const MCParams& mc = {});

// (2 pi)^-9 int_{|p| <= p_cut} dp int dr dr' W(p)^2 1_allowed / D, the
// continuum limit of the per-volume lattice correction sum.
double correction_continuum(const ScatteringSolution& sol, double k_up, double k_down, double eps,
                            double p_cut);

struct DomainSplit {
  double split = 0.0;  // rho^(1/3 - gamma)
  double inner = 0.0;  // -(2 pi)^-9 int_{|p| <= split} W^2 (Pauli) / D
  double outer = 0.0;
  double counterterm_inner = 0.0;  // +(2 pi)^-9 vol vol int_{|p| <= split} W^2 / (2 p^2)
  double counterterm_outer = 0.0;  // same quantity from the outer side, sign flipped
  double cancellation = 0.0;       // counterterm_inner + counterterm_outer
  double grad_term = 0.0;          // 2 rho_up rho_down int |grad phi|^2
  double outer_residual = 0.0;     // outer - (-grad_term + counterterm_inner)
  double second_term = 0.0;        // inner + outer
};

DomainSplit domain_split_report(const ScatteringSolution& sol, const SpinDensities& d, double eps,
                                double gamma);

}  // namespace hyk
