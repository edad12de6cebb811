#include "hyk/lattice.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "hyk/errors.hpp"
#include "hyk/kernels.hpp"
#include "hyk/parallel.hpp"

namespace hyk {

namespace {

constexpr double kPi = std::numbers::pi;

// Largest n with unit^2 n <= k^2, ties kept inside.
long shell_limit(double k, double unit) {
  if (!(k > 0.0)) return -1;
  double x = (k / unit) * (k / unit);
  return static_cast<long>(std::floor(x * (1.0 + 1e-12) + 1e-9));
}

std::vector<IVec3> enumerate_ball(long n) {
  std::vector<IVec3> out;
  if (n < 0) return out;
  int m = static_cast<int>(std::sqrt(static_cast<double>(n))) + 1;
  for (int i = -m; i <= m; ++i)
    for (int j = -m; j <= m; ++j)
      for (int k = -m; k <= m; ++k) {
        IVec3 v{i, j, k};
        if (norm2(v) <= n) out.push_back(v);
      }
  return out;
}

// r3(n) for n <= n_max.
std::vector<double> shell_counts(long n_max) {
  std::vector<double> c(static_cast<std::size_t>(n_max) + 1, 0.0);
  long m = static_cast<long>(std::sqrt(static_cast<double>(n_max))) + 1;
  for (long i = -m; i <= m; ++i)
    for (long j = -m; j <= m; ++j) {
      long ij = i * i + j * j;
      if (ij > n_max) continue;
      for (long k = -m; k <= m; ++k) {
        long s = ij + k * k;
        if (s <= n_max) c[static_cast<std::size_t>(s)] += 1.0;
      }
    }
  return c;
}

int orbit_size(const IVec3& p) {
  static const int perm[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  std::set<IVec3> seen;
  for (const auto& pm : perm)
    for (int s = 0; s < 8; ++s) {
      IVec3 q{};
      for (int i = 0; i < 3; ++i) q[i] = ((s >> i) & 1 ? -1 : 1) * p[pm[i]];
      seen.insert(q);
    }
  return static_cast<int>(seen.size());
}

struct Histogram {
  std::vector<double> values, counts;
};

Histogram compact(const std::vector<double>& dense, long offset) {
  Histogram h;
  for (std::size_t i = 0; i < dense.size(); ++i)
    if (dense[i] != 0.0) {
      h.values.push_back(static_cast<double>(static_cast<long>(i) + offset));
      h.counts.push_back(dense[i]);
    }
  return h;
}

// Integer numerators of the Pauli-allowed excitations at transfer p:
//   A = |r + p|^2 - |r|^2 over r in B_up with r + p outside,
//   B = |r' - p|^2 - |r'|^2 over r' in B_down with r' - p outside.
std::pair<Histogram, Histogram> excitation_histograms(const MomentumLattice& lat, const IVec3& p) {
  long np = norm2(p);
  long pl = static_cast<long>(std::ceil(std::sqrt(static_cast<double>(np))));
  auto build = [&](int spin, int sign) {
    long rmax = static_cast<long>(std::ceil(std::sqrt(static_cast<double>(std::max(lat.n_f[spin], 0L)))));
    long lo = np - 2 * rmax * pl - 1;
    long hi = np + 2 * rmax * pl + 1;
    std::vector<double> dense(static_cast<std::size_t>(hi - lo + 1), 0.0);
    for (const IVec3& r : lat.ball[spin]) {
      IVec3 q{r[0] + sign * p[0], r[1] + sign * p[1], r[2] + sign * p[2]};
      if (norm2(q) <= lat.n_f[spin]) continue;
      long dot = static_cast<long>(r[0]) * p[0] + static_cast<long>(r[1]) * p[1] + static_cast<long>(r[2]) * p[2];
      long v = np + 2 * sign * dot;
      dense[static_cast<std::size_t>(v - lo)] += 1.0;
    }
    return compact(dense, lo);
  };
  return {build(0, +1), build(1, -1)};
}

double w_at_shell(const PeriodicScattering& per, double unit, long n) {
  return 2.0 * unit * unit * static_cast<double>(n) * per.phi[static_cast<std::size_t>(n)];
}

}  // namespace

long norm2(const IVec3& k) {
  return static_cast<long>(k[0]) * k[0] + static_cast<long>(k[1]) * k[1] + static_cast<long>(k[2]) * k[2];
}

bool MomentumLattice::in_ball(int spin, const IVec3& k) const {
  if (spin < 0 || spin > 1) throw InputError("spin index must be 0 or 1");
  return norm2(k) <= n_f[static_cast<std::size_t>(spin)];
}

double MomentumLattice::k_f_effective(int spin) const {
  if (spin < 0 || spin > 1) throw InputError("spin index must be 0 or 1");
  return std::cbrt(6.0 * kPi * kPi * static_cast<double>(N[static_cast<std::size_t>(spin)]) / (L * L * L));
}

MomentumLattice build_lattice(double L, const SpinDensities& d, double p_cutoff) {
  if (!(L > 0.0)) throw InputError("box side must be positive");
  if (!(p_cutoff > 0.0)) throw InputError("p_cutoff must be positive");
  MomentumLattice lat;
  lat.L = L;
  lat.unit = 2.0 * kPi / L;
  lat.p_cutoff = p_cutoff;
  lat.k_f = {d.kf_up(), d.kf_down()};
  lat.n_cut = static_cast<long>(std::floor((p_cutoff / lat.unit) * (p_cutoff / lat.unit) + 1e-9));
  for (int s = 0; s < 2; ++s) {
    lat.n_f[s] = shell_limit(lat.k_f[s], lat.unit);
    if (lat.n_f[s] > 4000000) throw ResourceError("Fermi ball too large for enumeration");
    lat.ball[s] = enumerate_ball(lat.n_f[s]);
    lat.N[s] = lat.ball[s].size();
  }
  if (lat.n_cut > 4000000) throw ResourceError("momentum cutoff too large for enumeration");
  lat.modes = enumerate_ball(lat.n_cut);
  return lat;
}

std::size_t brute_force_ball_count(long n) {
  if (n < 0) return 0;
  long m = 0;
  while ((m + 1) * (m + 1) <= n) ++m;
  std::size_t c = 0;
  for (long i = -m; i <= m; ++i)
    for (long j = -m; j <= m; ++j)
      for (long k = -m; k <= m; ++k)
        if (i * i + j * j + k * k <= n) ++c;
  return c;
}

FfgEnergy ffg_energy(const MomentumLattice& lat, double v_hat0) {
  FfgEnergy e;
  long double kin = 0.0L;
  for (int s = 0; s < 2; ++s)
    for (const IVec3& k : lat.ball[s]) kin += static_cast<long double>(norm2(k));
  double u2 = lat.unit * lat.unit, vol = lat.L * lat.L * lat.L;
  e.kinetic = static_cast<double>(kin) * u2;
  e.kinetic_per_volume = e.kinetic / vol;
  double r_up = static_cast<double>(lat.N[0]) / vol, r_dn = static_cast<double>(lat.N[1]) / vol;
  e.leading_per_volume = e.kinetic_per_volume + v_hat0 * r_up * r_dn;
  return e;
}

CorrectionSum correction_lattice_sum(const MomentumLattice& lat, const PeriodicScattering& per, double eps,
                                     double truncation_tol) {
  if (!(eps > 0.0)) throw InputError("eps must be positive");
  if (std::fabs(per.L - lat.L) > 1e-12 * lat.L) throw InputError("lattice and coefficient table differ in L");
  if (per.n_max < lat.n_cut) throw InputError("coefficient table does not cover the lattice cutoff");
  CorrectionSum out;
  const double u2 = lat.unit * lat.unit;
  const double vol = lat.L * lat.L * lat.L;
  if (lat.N[0] > 0 && lat.N[1] > 0) {
    // Summand is invariant under the cube group; sum canonical representatives.
    std::vector<IVec3> reps;
    int m = static_cast<int>(std::sqrt(static_cast<double>(lat.n_cut))) + 1;
    for (int a = 0; a <= m; ++a)
      for (int b = a; b <= m; ++b)
        for (int c = b; c <= m; ++c) {
          IVec3 p{a, b, c};
          long n = norm2(p);
          if (n > 0 && n <= lat.n_cut) reps.push_back(p);
        }
    out.orbits = reps.size();
    const double shift = 2.0 * eps / u2;
    double s = deterministic_reduce<double>(
        reps.size(),
        [&](std::size_t i) {
          const IVec3& p = reps[i];
          double w = w_at_shell(per, lat.unit, norm2(p));
          if (w == 0.0) return 0.0;
          auto [A, B] = excitation_histograms(lat, p);
          if (A.values.empty() || B.values.empty()) return 0.0;
          double acc = 0.0;
          for (std::size_t j = 0; j < A.values.size(); ++j)
            acc += A.counts[j] *
                   kernels::row_reciprocal_sum(A.values[j], B.values.data(), B.counts.data(), B.values.size(), shift);
          return orbit_size(p) * w * w * acc / u2;
        },
        [](double x, double y) { return x + y; }, 0.0);
    out.value = s / (vol * vol);
  }
  out.per_volume = out.value / vol;

  // Beyond the cutoff D >= 2 p^2 (1 - 2 kmax / p_cutoff) and the Pauli factors are <= 1.
  double kmax = std::max(lat.k_f[0], lat.k_f[1]);
  double volb[2];
  for (int s = 0; s < 2; ++s) volb[s] = static_cast<double>(lat.N[s]) * u2 * lat.unit;
  if (lat.N[0] == 0 || lat.N[1] == 0) {
    out.truncation_bound = 0.0;
  } else if (lat.p_cutoff <= 2.0 * kmax) {
    out.truncation_bound = std::numeric_limits<double>::infinity();
  } else {
    out.truncation_bound = std::pow(2.0 * kPi, -9.0) * 4.0 * kPi * volb[0] * volb[1] /
                           (2.0 * (1.0 - 2.0 * kmax / lat.p_cutoff)) * per.w2_tail;
  }
  if (out.truncation_bound > truncation_tol * std::fabs(out.per_volume) && out.truncation_bound > 0.0)
    out.warning = "truncation bound exceeds tolerance; raise p_cutoff";
  return out;
}

double correction_lattice_sum_bruteforce(const MomentumLattice& lat, const PeriodicScattering& per, double eps) {
  if (!(eps > 0.0)) throw InputError("eps must be positive");
  const double u2 = lat.unit * lat.unit, vol = lat.L * lat.L * lat.L;
  long double acc = 0.0L;
  for (const IVec3& p : lat.modes) {
    long np = norm2(p);
    if (np == 0) continue;
    double w = w_at_shell(per, lat.unit, np);
    for (const IVec3& r : lat.ball[0]) {
      IVec3 rp{r[0] + p[0], r[1] + p[1], r[2] + p[2]};
      if (lat.in_ball(0, rp)) continue;
      double lam = u2 * static_cast<double>(norm2(rp) - norm2(r));
      for (const IVec3& s : lat.ball[1]) {
        IVec3 sp{s[0] - p[0], s[1] - p[1], s[2] - p[2]};
        if (lat.in_ball(1, sp)) continue;
        double lamp = u2 * static_cast<double>(norm2(sp) - norm2(s));
        acc += static_cast<long double>(w * w / (lam + lamp + 2.0 * eps));
      }
    }
  }
  return static_cast<double>(acc) / (vol * vol);
}

// ---------------------------------------------------------------------------
// t-integrals. After integrating over t each display becomes a shell sum
// (1/L^3) sum_k f(|k|), with windows set by K3 = 3 rho^(1/3-gamma) and
// K6 = 6 rho^(1/3-gamma).

namespace {

struct ShellSum {
  std::vector<double> count;
  double unit = 0.0, vol = 0.0;
  long n_top = 0;

  // sum over n in [lo, hi] of r3(n) f(unit sqrt(n)) / vol
  template <class F>
  double sum(long lo, long hi, F f) const {
    long double acc = 0.0L;
    lo = std::max(lo, 0L);
    hi = std::min(hi, n_top);
    for (long n = lo; n <= hi; ++n) {
      double c = count[static_cast<std::size_t>(n)];
      if (c == 0.0) continue;
      acc += static_cast<long double>(c * f(unit * std::sqrt(static_cast<double>(n))));
    }
    return static_cast<double>(acc) / vol;
  }

  // Continuum tail (1 / (2 pi^2)) int_{k0}^inf k^2 f(k) dk beyond the last shell.
  template <class F>
  double tail(F f) const {
    double k0 = unit * std::sqrt(static_cast<double>(n_top) + 0.5);
    auto g = [&](double k) { return k * k * f(k); };
    double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        g, k0, std::numeric_limits<double>::infinity(), 15, 1e-12);
    return v / (2.0 * kPi * kPi);
  }
};

long ceil_shell(double k, double unit) {
  double x = (k / unit) * (k / unit);
  return static_cast<long>(std::ceil(x * (1.0 - 1e-12) - 1e-9));
}

std::vector<double> t_values_on_box(const SpinDensities& d, double gamma, double delta, double L) {
  const double rho = d.total();
  const double kf = std::max(d.kf_up(), d.kf_down());
  const double kf_up = d.kf_up(), kf_dn = d.kf_down();
  const double eps = std::pow(rho, 2.0 / 3.0 + delta);
  const double base = std::pow(rho, 1.0 / 3.0 - gamma);
  const double K3 = 3.0 * base, K6 = 6.0 * base;
  ShellSum ss;
  ss.unit = 2.0 * kPi / L;
  ss.vol = L * L * L;
  long n6 = shell_limit(K6, ss.unit), n3c = ceil_shell(K3, ss.unit);
  long n_top = std::max({n6, ceil_shell(4.0 * K3, ss.unit), 1600L});
  if (n_top > 400000) throw ResourceError("t-integral shell range too large; reduce L");
  ss.n_top = n_top;
  ss.count = shell_counts(n_top);
  long nf = shell_limit(kf, ss.unit);

  std::vector<double> out(5);
  // fac1: k_F < |k| <= K6
  out[0] = ss.sum(nf + 1, n6, [&](double k) { return 1.0 / (2.0 * (k * k - kf * kf) + 2.0 * eps); });
  // fac2: |k| <= k_F
  out[1] = ss.sum(0, nf, [&](double k) { return 1.0 / (2.0 * std::max(kf * kf - k * k, 0.0) + 2.0 * eps); });
  // fac2u>: |k| >= K3
  auto f3 = [&](double k) { return 1.0 / (2.0 * k * k * (k * k - kf * kf)); };
  out[2] = ss.sum(n3c, n_top, f3) + ss.tail(f3);
  auto f4 = [&](double k) { return 1.0 / (2.0 * k * k * k * k * (k * k - kf * kf)); };
  out[3] = ss.sum(n3c, n_top, f4) + ss.tail(f4);
  auto f5 = [&](double k) { return 1.0 / (k * k * (k * k - kf_up * kf_up - kf_dn * kf_dn)); };
  out[4] = ss.sum(n3c, n_top, f5) + ss.tail(f5);
  return out;
}

void check_t_params(const SpinDensities& d, double gamma, double delta, double L) {
  if (!(gamma > 0.0 && gamma < 1.0 / 6.0)) throw InputError("gamma must lie in (0, 1/6)");
  if (!(delta > 1.0 / 3.0)) throw InputError("delta must exceed 1/3");
  if (!(L > 0.0)) throw InputError("box side must be positive");
  if (!(d.total() > 0.0)) throw InputError("density must be positive");
}

}  // namespace

std::vector<double> t_integral_values(const SpinDensities& d, double gamma, double delta, double L) {
  check_t_params(d, gamma, delta, L);
  return t_values_on_box(d, gamma, delta, L);
}

std::vector<TIntegral> t_integral_suite(const SpinDensities& d, double gamma, double delta, double L,
                                        const TIntegralOptions& opt) {
  check_t_params(d, gamma, delta, L);
  if (opt.points < 2 || !(opt.decades > 0.0)) throw InputError("need >= 2 points over a positive range");
  if (!(opt.kappa > 0.0)) throw InputError("kappa must be positive");
  const char* names[5] = {"fac1", "fac2", "fac2u>", "fac2u>b", "nu_infty"};
  const double targets[5] = {1.0 / 3.0 - gamma, 1.0 / 3.0 - opt.kappa, -1.0 / 3.0 + gamma, -1.0 + 3.0 * gamma,
                             -1.0 / 3.0 + gamma};
  std::vector<std::vector<std::pair<double, double>>> pts(5);
  for (int i = 0; i < opt.points; ++i) {
    double f = std::pow(10.0, opt.decades * i / (opt.points - 1));
    SpinDensities di(d.rho_up * f, d.rho_down * f);
    double Li = L * std::cbrt(1.0 / f);
    auto v = t_values_on_box(di, gamma, delta, Li);
    for (int j = 0; j < 5; ++j) pts[j].emplace_back(di.total(), v[j]);
  }
  std::vector<TIntegral> out;
  for (int j = 0; j < 5; ++j) {
    TIntegral t;
    t.name = names[j];
    t.target = targets[j];
    t.kappa = j == 1 ? opt.kappa : 0.0;
    t.fit = loglog_fit(pts[j], opt.points >= 4 && opt.decades >= 1.0);
    out.push_back(std::move(t));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// theta(a) = sum_{n in Z} exp(-a n^2)
double theta(double a) {
  if (a < 1.0) {
    // Poisson dual: sqrt(pi / a) sum_n exp(-pi^2 n^2 / a)
    double b = kPi * kPi / a, s = 1.0;
    for (int n = 1; n < 50; ++n) {
      double t = 2.0 * std::exp(-b * n * n);
      s += t;
      if (t < 1e-18 * s) break;
    }
    return std::sqrt(kPi / a) * s;
  }
  double s = 1.0;
  for (int n = 1; n < 50; ++n) {
    double t = 2.0 * std::exp(-a * n * n);
    s += t;
    if (t < 1e-18 * s) break;
  }
  return s;
}

}  // namespace

HeatKernelNorms heat_kernel_norms(double t, double L, double rho, double gamma) {
  if (!(t > 0.0)) throw InputError("t must be positive");
  if (!(L > 0.0) || !(rho > 0.0)) throw InputError("L and rho must be positive");
  if (!(gamma > 0.0 && gamma < 1.0 / 6.0)) throw InputError("gamma must lie in (0, 1/6)");
  HeatKernelNorms h;
  const double unit = 2.0 * kPi / L, vol = L * L * L;

  // zeta_1^t is a product of 1D periodized Gaussians; integrate one factor.
  double sd = std::sqrt(t);
  long M = std::max(64L, static_cast<long>(std::ceil(3.0 * L / sd)));
  if (M > 20000000) throw ResourceError("heat kernel grid too fine");
  double hstep = L / static_cast<double>(M);
  long images = static_cast<long>(std::ceil(std::sqrt(160.0 * t) / L)) + 1;
  double norm = 1.0 / std::sqrt(4.0 * kPi * t);
  long double I = 0.0L;
  double mn = std::numeric_limits<double>::infinity();
  for (long j = 0; j < M; ++j) {
    double x = -0.5 * L + (j + 0.5) * hstep;
    double g = 0.0;
    for (long n = -images; n <= images; ++n) {
      double y = x + static_cast<double>(n) * L;
      g += std::exp(-y * y / (4.0 * t));
    }
    g *= norm;
    mn = std::min(mn, g);
    I += static_cast<long double>(g);
  }
  double one = static_cast<double>(I) * hstep;
  h.l1 = one * one * one;
  h.min_value = mn * mn * mn;
  h.l1_exact = 1.0;

  double th = theta(2.0 * t * unit * unit);
  double full = th * th * th;
  double K3 = 3.0 * std::pow(rho, 1.0 / 3.0 - gamma);
  long n3 = ceil_shell(K3, unit);  // |k| >= K3 <=> n >= n3
  if (n3 > 4000000) throw ResourceError("heat kernel shell range too large");
  double inner = 0.0;
  if (n3 > 0) {
    auto c = shell_counts(n3 - 1);
    long double acc = 0.0L;
    for (long n = 0; n < n3; ++n)
      if (c[static_cast<std::size_t>(n)] != 0.0)
        acc += static_cast<long double>(c[static_cast<std::size_t>(n)] *
                                        std::exp(-2.0 * t * unit * unit * static_cast<double>(n)));
    inner = static_cast<double>(acc);
  }
  h.l2_one = std::sqrt(full / vol);
  h.l2_gt = std::sqrt(std::max(full - inner, 0.0) / vol);
  h.rescaled = h.l2_gt * std::exp(4.5 * t * std::pow(rho, 2.0 / 3.0 - 2.0 * gamma));
  return h;
}

ScalingFit heat_kernel_scaling(double L, double rho, double gamma, double t_lo, double t_hi, int points) {
  if (!(t_lo > 0.0 && t_hi > t_lo) || points < 2) throw InputError("need 0 < t_lo < t_hi and >= 2 points");
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < points; ++i) {
    double t = t_lo * std::pow(t_hi / t_lo, static_cast<double>(i) / (points - 1));
    pts.emplace_back(t, heat_kernel_norms(t, L, rho, gamma).rescaled);
  }
  return loglog_fit(pts);
}

}  // namespace hyk
