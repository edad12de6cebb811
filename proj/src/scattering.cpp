#include "hyk/scattering.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "hyk/errors.hpp"

namespace hyk {

namespace {

constexpr double kPi = std::numbers::pi;
using State = std::array<double, 2>;

// Composite Simpson over the segmented grid [0, R]; every segment has an
// even number of intervals of equal width.
template <class F>
double simpson(const ScatteringSolution& s, F f) {
  double total = 0.0;
  std::size_t start = 0;
  for (std::size_t end : s.segment_ends) {
    std::size_t n = end - start;
    if (n == 0) continue;
    double h = (s.r[end] - s.r[start]) / static_cast<double>(n);
    double acc = f(start) + f(end);
    for (std::size_t i = start + 1; i < end; ++i) acc += ((i - start) % 2 ? 4.0 : 2.0) * f(i);
    total += acc * h / 3.0;
    start = end;
  }
  return total;
}

double hermite(double x0, double x1, double f0, double f1, double d0, double d1, double x) {
  double h = x1 - x0, t = (x - x0) / h, t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * f1 +
         (t3 - t2) * h * d1;
}

}  // namespace

ScatteringSolution solve_zero_energy(const RadialPotential& v, const GridSpec& grid) {
  if (grid.nodes < 2) throw InputError("grid needs at least 2 interior intervals");
  if (!(grid.rtol > 0.0)) throw InputError("rtol must be positive");
  const double R = v.support_radius();
  const double r_max = grid.r_max > 0.0 ? grid.r_max : 2.0 * R;
  if (r_max < R) throw InputError("grid does not cover the potential support");

  ScatteringSolution s;
  s.potential = v;
  s.support = R;

  // Split [0, R] at the breakpoints, an even interval count per piece.
  std::vector<double> br = v.breakpoints();
  s.r.push_back(0.0);
  for (std::size_t j = 0; j + 1 < br.size(); ++j) {
    double len = br[j + 1] - br[j];
    int n = static_cast<int>(std::ceil(grid.nodes * len / R));
    n = std::max(2, n + (n % 2));
    for (int i = 1; i <= n; ++i) s.r.push_back(i == n ? br[j + 1] : br[j] + len * i / n);
    s.segment_ends.push_back(s.r.size() - 1);
  }
  s.n_support = s.r.size() - 1;

  namespace ode = boost::numeric::odeint;
  auto stepper = ode::make_controlled(grid.rtol * 1e-2, grid.rtol * 1e-2, ode::runge_kutta_dopri5<State>());
  State y{0.0, 1.0};
  s.u.assign(s.r.size(), 0.0);
  s.du.assign(s.r.size(), 0.0);
  s.du[0] = 1.0;
  std::size_t start = 0;
  for (std::size_t end : s.segment_ends) {
    // The right-hand side may jump at breakpoints; sample V strictly inside.
    double lo = s.r[start], hi = s.r[end];
    auto rhs = [&](const State& x, State& dx, double t) {
      double tt = std::clamp(t, lo + 1e-14 * (hi - lo), hi - 1e-14 * (hi - lo));
      dx[0] = x[1];
      dx[1] = 0.5 * v.eval(tt) * x[0];
    };
    for (std::size_t i = start; i < end; ++i) {
      double dt = (s.r[i + 1] - s.r[i]) / 4.0;
      ode::integrate_adaptive(stepper, rhs, y, s.r[i], s.r[i + 1], dt);
      s.u[i + 1] = y[0];
      s.du[i + 1] = y[1];
    }
    start = end;
  }

  // V >= 0, so a vanishing integral means V = 0 a.e.: the free solution u = r is exact.
  if (v_hat_zero(v) == 0.0)
    for (std::size_t i = 0; i <= s.n_support; ++i) {
      s.u[i] = s.r[i];
      s.du[i] = 1.0;
    }

  double uR = s.u[s.n_support], c = s.du[s.n_support];
  if (!std::isfinite(uR) || !std::isfinite(c) || !(c > 0.0))
    throw ConvergenceError("zero-energy solution is not finite at the support edge");
  s.c = c;
  s.a = R - uR / c;
  if (s.a < 0.0 && s.a > -1e-12 * R) s.a = 0.0;
  if (!(s.a >= 0.0) || s.a > R * (1.0 + 1e-9))
    throw ConvergenceError("scattering length outside [0, R]; solver residual too large");

  // Exterior: u = c (r - a), phi = a / r.
  double hx = (r_max - R) / std::max(1, grid.exterior_nodes);
  for (int i = 1; i <= grid.exterior_nodes && r_max > R; ++i) {
    double x = R + hx * i;
    s.r.push_back(x);
    s.u.push_back(c * (x - s.a));
    s.du.push_back(c);
  }
  s.phi.resize(s.r.size());
  s.phi[0] = 1.0 - 1.0 / c;
  for (std::size_t i = 1; i < s.r.size(); ++i)
    s.phi[i] = i > s.n_support ? s.a / s.r[i] : 1.0 - s.u[i] / (c * s.r[i]);
  for (double& p : s.phi) p = std::clamp(p, 0.0, 1.0);

  // Quadrature cache for the transform.
  const auto& xs = boost::math::quadrature::gauss<double, 8>::abscissa();
  const auto& ws = boost::math::quadrature::gauss<double, 8>::weights();
  for (std::size_t i = 0; i < s.n_support; ++i) {
    double x0 = s.r[i], x1 = s.r[i + 1], mid = 0.5 * (x0 + x1), half = 0.5 * (x1 - x0);
    for (std::size_t j = 0; j < xs.size(); ++j) {
      for (int sgn : {-1, 1}) {
        if (xs[j] == 0.0 && sgn < 0) continue;
        double x = mid + sgn * half * xs[j];
        double uu = hermite(x0, x1, s.u[i], s.u[i + 1], s.du[i], s.du[i + 1], x);
        s.quad_r.push_back(x);
        s.quad_w.push_back(half * ws[j]);
        s.quad_g.push_back(x - uu / c);
      }
    }
  }
  return s;
}

double ScatteringSolution::u_at(double x) const {
  if (!(x >= 0.0)) throw InputError("u_at needs r >= 0");
  if (x >= support) return c * (x - a);
  auto it = std::upper_bound(r.begin(), r.begin() + static_cast<long>(n_support) + 1, x);
  std::size_t j = static_cast<std::size_t>(it - r.begin());
  if (j == 0) j = 1;
  return hermite(r[j - 1], r[j], u[j - 1], u[j], du[j - 1], du[j], x);
}

double ScatteringSolution::phi_at(double x) const {
  if (!(x >= 0.0)) throw InputError("phi_at needs r >= 0");
  if (x >= support) return a / x;
  if (x == 0.0) return phi[0];
  return std::clamp(1.0 - u_at(x) / (c * x), 0.0, 1.0);
}

double ScatteringSolution::int_v_f() const {
  double I = simpson(*this, [&](std::size_t i) { return potential.eval(r[i]) * u[i] * r[i]; });
  return 4.0 * kPi * I / c;
}

double ScatteringSolution::int_v_one_minus_phi_sq() const {
  double I1 = simpson(*this, [&](std::size_t i) { return potential.eval(r[i]) * u[i] * r[i]; });
  double I2 = simpson(*this, [&](std::size_t i) { return potential.eval(r[i]) * u[i] * u[i]; });
  return 4.0 * kPi * (2.0 * I1 / c - I2 / (c * c));
}

double ScatteringSolution::int_grad_phi_sq() const {
  double I = simpson(*this, [&](std::size_t i) {
    if (r[i] == 0.0) return 0.0;
    double w = (du[i] * r[i] - u[i]) / r[i];
    return w * w;
  });
  return 4.0 * kPi * (I / (c * c) + (support > 0.0 ? a * a / support : 0.0));
}

double scattering_w(const ScatteringSolution& sol, double p) {
  if (!(p >= 0.0)) throw InputError("momentum must be >= 0");
  if (sol.a == 0.0) return 0.0;
  double acc = 0.0;
  for (std::size_t j = 0; j < sol.quad_r.size(); ++j)
    acc += sol.quad_w[j] * std::sin(p * sol.quad_r[j]) * sol.quad_g[j];
  return 8.0 * kPi * (sol.a * std::cos(p * sol.support) + p * acc);
}

double fourier_phi(const ScatteringSolution& sol, double p) {
  if (!(p >= 0.0)) throw InputError("fourier_phi needs p >= 0");
  if (p == 0.0) return sol.a == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return scattering_w(sol, p) / (2.0 * p * p);
}

double energy_identity_residual(const ScatteringSolution& sol) {
  double lhs = sol.int_v_one_minus_phi_sq() - 2.0 * sol.int_grad_phi_sq();
  double target = 8.0 * kPi * sol.a;
  double d = std::fabs(lhs - target);
  return sol.a > 0.0 ? d / target : d;
}

double chi_hat(double s) {
  s = std::fabs(s);
  if (s <= 1.0) return 1.0;
  if (s >= 1.25) return 0.0;
  double t = (s - 1.0) / 0.25;
  auto g = [](double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; };
  double a = g(1.0 - t), b = g(t);
  return a / (a + b);
}

WTable::WTable(const ScatteringSolution& sol, double p_max, std::size_t n) {
  if (!(p_max > 0.0) || n < 4) throw InputError("WTable needs p_max > 0 and n >= 4");
  p_max_ = p_max;
  h_ = p_max / static_cast<double>(n);
  vals_.resize(n + 3);
  // vals_[i + 1] = W(i h); W is even in p, so the left pad mirrors.
  for (std::size_t i = 0; i <= n + 1; ++i) vals_[i + 1] = scattering_w(sol, h_ * static_cast<double>(i));
  vals_[0] = vals_[2];
}

double WTable::operator()(double p) const {
  p = std::fabs(p);
  if (p > p_max_) return 0.0;
  double x = p / h_;
  std::size_t i = std::min(static_cast<std::size_t>(x), vals_.size() - 4);
  double t = x - static_cast<double>(i);
  const double* f = &vals_[i];  // nodes at i-1, i, i+1, i+2
  double tm1 = t + 1.0, t1 = t - 1.0, t2 = t - 2.0;
  return -f[0] * t * t1 * t2 / 6.0 + f[1] * tm1 * t1 * t2 / 2.0 - f[2] * tm1 * t * t2 / 2.0 +
         f[3] * tm1 * t * t1 / 6.0;
}

PeriodicScattering periodize(const ScatteringSolution& sol, double L, double gamma, double p_cutoff,
                             double rho) {
  if (!(L > 2.0 * sol.support)) throw InputError("box side must exceed twice the support radius");
  if (!(gamma > 0.0 && gamma < 1.0 / 6.0)) throw InputError("gamma must lie in (0, 1/6)");
  if (!(p_cutoff > 0.0) || !(rho > 0.0)) throw InputError("p_cutoff and rho must be positive");
  PeriodicScattering ps;
  ps.L = L;
  ps.gamma = gamma;
  ps.rho = rho;
  ps.ell = 4.0 * std::pow(rho, 1.0 / 3.0 - gamma);
  ps.p_cutoff = p_cutoff;
  double unit = 2.0 * kPi / L;
  ps.n_max = static_cast<long>(std::floor((p_cutoff / unit) * (p_cutoff / unit) + 1e-9));
  std::size_t n = static_cast<std::size_t>(ps.n_max) + 1;
  ps.phi.assign(n, 0.0);
  ps.phi_lt.assign(n, 0.0);
  ps.phi_gt.assign(n, 0.0);
  ps.present.assign(n, 0);
  long m = static_cast<long>(std::sqrt(static_cast<double>(ps.n_max))) + 1;
  for (long i = 0; i <= m; ++i)
    for (long j = i; j <= m; ++j)
      for (long k = j; k <= m; ++k) {
        long s = i * i + j * j + k * k;
        if (s <= ps.n_max) ps.present[static_cast<std::size_t>(s)] = 1;
      }
  for (std::size_t s = 1; s < n; ++s) {
    if (!ps.present[s]) continue;
    double p = unit * std::sqrt(static_cast<double>(s));
    double f = fourier_phi(sol, p);
    ps.phi[s] = f;
    ps.phi_lt[s] = f * chi_hat(p / ps.ell);
    ps.phi_gt[s] = f - ps.phi_lt[s];
  }
  if (sol.a > 0.0) {
    double hi = std::max(4.0 * p_cutoff, 400.0 / sol.support), step = 0.5 / sol.support;
    std::vector<double> edges{p_cutoff};
    for (double x = p_cutoff + step; x < hi; x += step) edges.push_back(x);
    edges.push_back(hi);
    const auto& xs = boost::math::quadrature::gauss<double, 10>::abscissa();
    const auto& ws = boost::math::quadrature::gauss<double, 10>::weights();
    for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
      double mid = 0.5 * (edges[e] + edges[e + 1]), half = 0.5 * (edges[e + 1] - edges[e]);
      for (std::size_t j = 0; j < xs.size(); ++j)
        for (int sgn : {-1, 1}) {
          double w = scattering_w(sol, mid + sgn * half * xs[j]);
          ps.w2_tail += half * ws[j] * w * w;
        }
    }
  }
  return ps;
}

std::size_t PeriodicScattering::shell(const std::array<int, 3>& k) const {
  long s = static_cast<long>(k[0]) * k[0] + static_cast<long>(k[1]) * k[1] + static_cast<long>(k[2]) * k[2];
  if (s > n_max) throw InputError("momentum outside the tabulated cutoff");
  return static_cast<std::size_t>(s);
}

double PeriodicScattering::coeff(const std::array<int, 3>& k) const { return phi[shell(k)]; }
double PeriodicScattering::coeff_lt(const std::array<int, 3>& k) const { return phi_lt[shell(k)]; }
double PeriodicScattering::coeff_gt(const std::array<int, 3>& k) const { return phi_gt[shell(k)]; }

double phi_gt_l1_norm(const ScatteringSolution& sol, double rho, double gamma) {
  if (!(rho > 0.0)) throw InputError("rho must be positive");
  if (!(gamma > 0.0 && gamma < 1.0 / 6.0)) throw InputError("gamma must lie in (0, 1/6)");
  if (sol.a == 0.0) return 0.0;
  const double ell = 4.0 * std::pow(rho, 1.0 / 3.0 - gamma);
  // phi^<(r) = (1 / (2 pi^2 r)) int_0^{5 ell / 4} sin(p r) W(p) chi(p / ell) / (2 p) dp
  const int np = 384;
  std::vector<double> pn, pw;
  {
    const auto& xs = boost::math::quadrature::gauss<double, 12>::abscissa();
    const auto& ws = boost::math::quadrature::gauss<double, 12>::weights();
    int panels = np / 12;
    double P = 1.25 * ell, h = P / panels;
    for (int q = 0; q < panels; ++q) {
      double mid = (q + 0.5) * h;
      for (std::size_t j = 0; j < xs.size(); ++j)
        for (int sgn : {-1, 1}) {
          double p = mid + sgn * 0.5 * h * xs[j];
          pn.push_back(p);
          pw.push_back(0.5 * h * ws[j] * scattering_w(sol, p) * chi_hat(p / ell) / (2.0 * p));
        }
    }
  }
  auto phi_lt = [&](double r) {
    double acc = 0.0;
    if (r < 1e-12) {
      for (std::size_t j = 0; j < pn.size(); ++j) acc += pw[j] * pn[j];
      return acc / (2.0 * kPi * kPi);
    }
    for (std::size_t j = 0; j < pn.size(); ++j) acc += pw[j] * std::sin(pn[j] * r);
    return acc / (2.0 * kPi * kPi * r);
  };
  auto f = [&](double r) { return std::fabs(sol.phi_at(r) - phi_lt(r)) * r * r; };
  using boost::math::quadrature::gauss_kronrod;
  std::vector<double> cuts{0.0, sol.support};
  for (double m : {1.0, 4.0, 16.0, 40.0, 100.0}) cuts.push_back(std::max(sol.support, m / ell));
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    if (cuts[i + 1] > cuts[i]) total += gauss_kronrod<double, 31>::integrate(f, cuts[i], cuts[i + 1], 12, 1e-9);
  return 4.0 * kPi * total;
}

double bethe_goldstone_kernel_w(double w, const Vec3& r, const Vec3& rp, const Vec3& p, double eps) {
  if (!(eps >= 0.0)) throw InputError("eps must be >= 0");
  double lam = 0.0, lamp = 0.0;
  for (int i = 0; i < 3; ++i) {
    lam += (r[i] + p[i]) * (r[i] + p[i]) - r[i] * r[i];
    lamp += (rp[i] - p[i]) * (rp[i] - p[i]) - rp[i] * rp[i];
  }
  double den = lam + lamp + 2.0 * eps;
  if (!(den > 0.0)) throw DomainError("nonpositive Bethe-Goldstone denominator");
  return w / den;
}

double bethe_goldstone_kernel(const ScatteringSolution& sol, const Vec3& r, const Vec3& rp,
                              const Vec3& p, double eps) {
  double pn = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
  return bethe_goldstone_kernel_w(scattering_w(sol, pn), r, rp, p, eps);
}

namespace {

// G(x) - 1/|x| for the zero-mean periodic kernel with coefficients 4 pi / k^2.
double coulomb_image_part(const Vec3& x, double L) {
  const double alpha = 3.5 / L;
  double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  double acc = r < 1e-12 ? -2.0 * alpha / std::sqrt(kPi) : -std::erf(alpha * r) / r;
  for (int i = -2; i <= 2; ++i)
    for (int j = -2; j <= 2; ++j)
      for (int k = -2; k <= 2; ++k) {
        if (i == 0 && j == 0 && k == 0) continue;
        double d = std::hypot(x[0] + i * L, x[1] + j * L, x[2] + k * L);
        acc += std::erfc(alpha * d) / d;
      }
  const double u = 2.0 * kPi / L;
  const int m = 8;  // exp(-k^2 / 4 alpha^2) < 1e-20 beyond
  double rec = 0.0;
  for (int i = -m; i <= m; ++i)
    for (int j = -m; j <= m; ++j)
      for (int k = -m; k <= m; ++k) {
        if (i == 0 && j == 0 && k == 0) continue;
        double k2 = u * u * (i * i + j * j + k * k);
        rec += std::exp(-k2 / (4.0 * alpha * alpha)) / k2 * std::cos(u * (i * x[0] + j * x[1] + k * x[2]));
      }
  return acc + 4.0 * kPi / (L * L * L) * rec - kPi / (alpha * alpha * L * L * L);
}

}  // namespace

double periodic_scattering_error(const ScatteringSolution& sol, double L) {
  const double R = sol.support;
  if (!(L > 2.0 * R)) throw InputError("box side must exceed twice the support radius");
  if (sol.a == 0.0) return 0.0;
  // g = (phi_inf - a / r) on |x| < R; its zero mode is removed by phi-hat(0) = 0.
  double g0 = 0.0;
  std::vector<double> cuts = sol.potential.breakpoints();
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    g0 += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [&](double r) { return sol.phi_at(r) * r * r; }, cuts[i], cuts[i + 1], 10, 1e-12);
  g0 = 4.0 * kPi * g0 - 2.0 * kPi * sol.a * R * R;
  const double shift = g0 / (L * L * L);
  // The image part is smooth and cubic-symmetric: sample radii along a
  // few symmetry directions.
  const std::array<Vec3, 4> dirs{Vec3{1, 0, 0}, Vec3{1 / std::sqrt(2.0), 1 / std::sqrt(2.0), 0},
                                 Vec3{1 / std::sqrt(3.0), 1 / std::sqrt(3.0), 1 / std::sqrt(3.0)},
                                 Vec3{0.8, 0.6, 0}};
  double worst = 0.0;
  for (int i = 0; i <= 8; ++i) {
    double r = R * i / 8.0;
    for (const Vec3& d : dirs) {
      double v = sol.a * coulomb_image_part({r * d[0], r * d[1], r * d[2]}, L) - shift;
      worst = std::max(worst, std::fabs(v));
      if (i == 0) break;
    }
  }
  return worst;
}

}  // namespace hyk
