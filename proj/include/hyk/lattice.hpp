#pragma once

#include <array>
#include <string>
#include <vector>

#include "hyk/fit.hpp"
#include "hyk/hyformula.hpp"
#include "hyk/scattering.hpp"

namespace hyk {

using IVec3 = std::array<int, 3>;

// Lambda* = (2 pi / L) Z^3. Momenta are stored as integer vectors k; the
// physical momentum is unit * k.
struct MomentumLattice {
  double L = 0.0;
  double unit = 0.0;
  double p_cutoff = 0.0;
  long n_cut = 0;                     // |k|^2 <= n_cut inside the cutoff
  std::array<double, 2> k_f{};        // continuum (6 pi^2 rho_sigma)^(1/3)
  std::array<long, 2> n_f{};          // |k|^2 <= n_f inside the ball; -1 if empty
  std::array<std::vector<IVec3>, 2> ball;
  std::array<std::size_t, 2> N{};
  std::vector<IVec3> modes;           // all k with |k|^2 <= n_cut

  bool in_ball(int spin, const IVec3& k) const;
  // (6 pi^2 N_sigma / L^3)^(1/3): the radius matching the realized density.
  double k_f_effective(int spin) const;
  double u_hat(int spin, const IVec3& k) const { return in_ball(spin, k) ? 0.0 : 1.0; }
  double v_hat(int spin, const IVec3& k) const { return in_ball(spin, k) ? 1.0 : 0.0; }
};

long norm2(const IVec3& k);

MomentumLattice build_lattice(double L, const SpinDensities& d, double p_cutoff);

// Brute-force count of |k|^2 <= n over the bounding cube.
std::size_t brute_force_ball_count(long n);

struct FfgEnergy {
  double kinetic = 0.0;             // sum over both balls of |k|^2
  double kinetic_per_volume = 0.0;
  double leading_per_volume = 0.0;  // kinetic / L^3 + V(0) N_up N_down / L^6
};

FfgEnergy ffg_energy(const MomentumLattice& lat, double v_hat0);

struct CorrectionSum {
  double value = 0.0;             // (1/L^6) sum_{p,r,r'} W^2 u u v v / D
  double per_volume = 0.0;        // value / L^3
  double truncation_bound = 0.0;  // per volume, from the tail of W^2 beyond p_cutoff
  std::string warning;
  std::size_t orbits = 0;
};

// p runs over the lattice cutoff; p = 0 drops out since phi_hat(0) = 0.
CorrectionSum correction_lattice_sum(const MomentumLattice& lat, const PeriodicScattering& per, double eps,
                                     double truncation_tol = 1e-2);

// Reference triple loop over (p, r, r') without symmetry reduction or
// histogramming; for cross-checks on small lattices.
double correction_lattice_sum_bruteforce(const MomentumLattice& lat, const PeriodicScattering& per, double eps);

struct TIntegral {
  std::string name;
  double target = 0.0;  // asserted exponent
  double kappa = 0.0;   // declared kappa (fac2 only)
  ScalingFit fit;
};

struct TIntegralOptions {
  int points = 5;
  double decades = 1.0;
  double kappa = 0.02;
};

// The five t-integrals in closed form, evaluated on boxes L_i = L (rho_0 / rho_i)^(1/3)
// (so k_F L stays fixed) over rho_i = rho_0 10^(decades i / (points - 1)).
std::vector<TIntegral> t_integral_suite(const SpinDensities& d, double gamma, double delta, double L,
                                        const TIntegralOptions& opt = {});

// Single-density values, in suite order.
std::vector<double> t_integral_values(const SpinDensities& d, double gamma, double delta, double L);

struct HeatKernelNorms {
  double l1 = 0.0;         // int_Lambda zeta_1^t, numerically
  double l1_exact = 1.0;   // hat zeta_1^t(0)
  double min_value = 0.0;  // min of zeta_1^t over the quadrature grid
  double l2_one = 0.0;     // ||zeta_1^t||_2
  double l2_gt = 0.0;      // ||zeta_>^t||_2
  double rescaled = 0.0;   // l2_gt * exp((9/2) t rho^(2/3 - 2 gamma))
};

HeatKernelNorms heat_kernel_norms(double t, double L, double rho, double gamma);

// Log-log slope of the rescaled ||zeta_>^t||_2 over t in [t_lo, t_hi].
ScalingFit heat_kernel_scaling(double L, double rho, double gamma, double t_lo, double t_hi, int points = 6);

}  // namespace hyk
