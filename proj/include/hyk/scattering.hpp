#pragma once

#include <array>
#include <string>
#include <vector>

#include "hyk/potential.hpp"

namespace hyk {

using Vec3 = std::array<double, 3>;

struct GridSpec {
  int nodes = 400;         // intervals on [0, support], split at potential breakpoints
  double r_max = 0.0;      // 0 means 2 * support
  int exterior_nodes = 64; // nodes on (support, r_max]
  double rtol = 1e-10;
};

// Zero-energy solution of u'' = (V/2) u, u(0) = 0, u'(0) = 1, and the profile
// phi = 1 - u / (c r) normalised so that phi = a / r outside the support.
struct ScatteringSolution {
  RadialPotential potential;
  double a = 0.0;
  double c = 1.0;            // u'(r) outside the support
  double support = 0.0;      // R
  std::size_t n_support = 0; // r[n_support] == R
  std::vector<double> r, phi, u, du;
  std::vector<std::size_t> segment_ends;  // grid indices of the breakpoints
  // 8-point Gauss-Legendre nodes per interval on [0, R] with weights and
  // g = r - u / c from the Hermite interpolant; used by fourier_phi.
  std::vector<double> quad_r, quad_w, quad_g;

  double phi_at(double x) const;
  double u_at(double x) const;

  // 4 pi int V (1 - phi) r^2 dr
  double int_v_f() const;
  // 4 pi int V (1 - phi^2) r^2 dr
  double int_v_one_minus_phi_sq() const;
  // 4 pi int |phi'|^2 r^2 dr, exterior a/r tail analytic
  double int_grad_phi_sq() const;
};

ScatteringSolution solve_zero_energy(const RadialPotential& v, const GridSpec& grid = {});

// Continuum transform of phi; +infinity at p = 0 (phi is not integrable).
double fourier_phi(const ScatteringSolution& sol, double p);
// W(p) = 2 p^2 phi_hat(p), with W(0) = 8 pi a.
double scattering_w(const ScatteringSolution& sol, double p);

// |int V(1-phi^2) - 2 int |grad phi|^2 - 8 pi a| / (8 pi a); absolute if a = 0.
double energy_identity_residual(const ScatteringSolution& sol);

// Smooth radial cutoff: 1 for s <= 1, 0 for s >= 5/4, C-infinity in between.
double chi_hat(double s);

// W sampled on a uniform grid, four-point Lagrange interpolation; zero beyond p_max.
class WTable {
 public:
  WTable() = default;
  WTable(const ScatteringSolution& sol, double p_max, std::size_t n);
  double operator()(double p) const;
  double p_max() const { return p_max_; }

 private:
  double p_max_ = 0.0, h_ = 1.0;
  std::vector<double> vals_;
};

// Lattice coefficients on (2 pi / L) Z^3, stored per shell n = |k|^2 in lattice units.
struct PeriodicScattering {
  double L = 0.0;
  double gamma = 0.0;
  double rho = 0.0;
  double ell = 0.0;  // 4 rho^(1/3 - gamma)
  double p_cutoff = 0.0;
  long n_max = 0;
  std::vector<double> phi, phi_lt, phi_gt;  // indexed by shell, phi[0] = 0
  std::vector<char> present;                // shell is a sum of three squares
  double w2_tail = 0.0;                     // int_{p_cutoff}^inf W(p)^2 dp

  // Coefficient at integer momentum (2 pi / L) k; input error outside the cutoff.
  double coeff(const std::array<int, 3>& k) const;
  double coeff_lt(const std::array<int, 3>& k) const;
  double coeff_gt(const std::array<int, 3>& k) const;
  std::size_t shell(const std::array<int, 3>& k) const;
};

PeriodicScattering periodize(const ScatteringSolution& sol, double L, double gamma, double p_cutoff,
                             double rho);

// sup over |x| <= R of |phi(x) - phi_inf(x)| for the periodized profile on a
// box of side L, i.e. the constant in |-2 Lap phi - V f + 8 pi a / L^3| <= e_L V.
// Image sums are Ewald-summed; e_L ~ 2.8373 a / L for large L.
double periodic_scattering_error(const ScatteringSolution& sol, double L);

// Continuum ||phi^>||_{L^1} for the split at ell = 4 rho^(1/3 - gamma).
double phi_gt_l1_norm(const ScatteringSolution& sol, double rho, double gamma);

// omega^eps_{r,r'}(p) = W(|p|) / (lambda_{p,r} + lambda_{-p,r'} + 2 eps).
double bethe_goldstone_kernel(const ScatteringSolution& sol, const Vec3& r, const Vec3& rp,
                              const Vec3& p, double eps);
// Same, with W already evaluated.
double bethe_goldstone_kernel_w(double w, const Vec3& r, const Vec3& rp, const Vec3& p, double eps);

}  // namespace hyk
