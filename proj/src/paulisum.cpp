#include "hyk/paulisum.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "hyk/errors.hpp"
#include "hyk/fit.hpp"
#include "hyk/parallel.hpp"
#include "hyk/quadrature.hpp"

namespace hyk {

namespace {

constexpr double kPi = std::numbers::pi;
using boost::math::quadrature::gauss_kronrod;

double ball_volume(double k) { return 4.0 * kPi / 3.0 * k * k * k; }

// int_s^inf ds' / (s'^2 + b s' + eps), for s beyond the largest real root.
double j_tail(double s, double b, double eps) {
  double delta = b * b - 4.0 * eps, y = 2.0 * s + b;
  if (delta > 0.0) {
    double sd = std::sqrt(delta), z = sd / y;
    if (z < 0.5) return z == 0.0 ? 2.0 / y : 2.0 / sd * std::atanh(z);
    double q = std::max(s * s + b * s + eps, 1e-300);
    return std::log((y + sd) * (y + sd) / (4.0 * q)) / sd;
  }
  if (delta < 0.0) {
    double sd = std::sqrt(-delta);
    return 2.0 / sd * std::atan2(sd, y);
  }
  return 2.0 / y;
}

// int_{s1}^{s2} (b s + eps) / (2 q) ds, q = s^2 + b s + eps.
double k_segment(double s1, double s2, double b, double eps) {
  double q1 = std::max(s1 * s1 + b * s1 + eps, 1e-300), q2 = s2 * s2 + b * s2 + eps;
  return 0.25 * b * std::log(q2 / q1) + 0.5 * (eps - 0.5 * b * b) * (j_tail(s1, b, eps) - j_tail(s2, b, eps));
}

// s^2 [1/(2 s^2) - 1_{s > s*} / (2 q)] integrated over s in (0, inf); the
// (b/4) log q(inf) piece is dropped, it cancels under any rule with
// sum_i w_i Omega_i = 0.
double radial_closed(double sstar, double b, double eps) {
  double q = std::max(sstar * sstar + b * sstar + eps, 1e-300);
  return 0.5 * sstar + 0.5 * ((eps - 0.5 * b * b) * j_tail(sstar, b, eps) - 0.5 * b * std::log(q));
}

// Positive root of s^2 - 2 t s + rr - k^2 = 0 (rr <= k^2). With t = -Omega.r it
// is the exit distance from the up ball along +Omega, with t = Omega.r' from
// the down ball along -Omega.
double exit_plus(double t, double rr, double k) {
  double disc = std::sqrt(std::max(t * t + k * k - rr, 0.0));
  return t >= 0.0 ? t + disc : std::max(k * k - rr, 0.0) / (disc - t);
}

struct AngularRule {
  std::vector<Vec3> dir;
  std::vector<double> w;
};

AngularRule product_rule(int n_theta, int n_phi) {
  if (n_theta < 2 || n_phi < 2) throw InputError("angular rule needs n_theta, n_phi >= 2");
  auto [mu, wm] = gauss_legendre(n_theta);
  AngularRule a;
  for (int i = 0; i < n_theta; ++i) {
    double st = std::sqrt(std::max(0.0, 1.0 - mu[i] * mu[i]));
    for (int j = 0; j < n_phi; ++j) {
      double ph = 2.0 * kPi * (j + 0.5) / n_phi;
      a.dir.push_back({st * std::cos(ph), st * std::sin(ph), mu[i]});
      a.w.push_back(wm[i] * 2.0 * kPi / n_phi);
    }
  }
  return a;
}

double uniform01(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

std::mt19937_64 unit_stream(std::uint64_t seed, std::uint64_t unit) {
  std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                   static_cast<std::uint32_t>(unit), static_cast<std::uint32_t>(unit >> 32), 0x68796bU};
  return std::mt19937_64(sq);
}

Vec3 sample_in_shell(std::mt19937_64& g, double k, int shell, int shells) {
  double rad = k * std::cbrt((shell + uniform01(g)) / shells);
  double ct = 2.0 * uniform01(g) - 1.0, ph = 2.0 * kPi * uniform01(g);
  double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
  return {rad * st * std::cos(ph), rad * st * std::sin(ph), rad * ct};
}

// Uniform random rotation (Shoemake), row-major.
std::array<double, 9> random_rotation(std::mt19937_64& g) {
  double u1 = uniform01(g), u2 = uniform01(g), u3 = uniform01(g);
  double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  double x = a * std::sin(2 * kPi * u2), y = a * std::cos(2 * kPi * u2);
  double z = b * std::sin(2 * kPi * u3), w = b * std::cos(2 * kPi * u3);
  return {1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w),
          2 * (x * y + z * w),     1 - 2 * (x * x + z * z), 2 * (y * z - x * w),
          2 * (x * z - y * w),     2 * (y * z + x * w),     1 - 2 * (x * x + y * y)};
}

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

constexpr int kChannels = 3;

struct Moments {
  double n = 0.0;
  std::array<double, kChannels> mean{}, m2{};
  void add(const std::array<double, kChannels>& x) {
    n += 1.0;
    for (int c = 0; c < kChannels; ++c) {
      double d = x[c] - mean[c];
      mean[c] += d / n;
      m2[c] += d * (x[c] - mean[c]);
    }
  }
  static Moments merge(const Moments& a, const Moments& b) {
    if (a.n == 0.0) return b;
    if (b.n == 0.0) return a;
    Moments m;
    m.n = a.n + b.n;
    for (int c = 0; c < kChannels; ++c) {
      double d = b.mean[c] - a.mean[c];
      m.mean[c] = a.mean[c] + d * b.n / m.n;
      m.m2[c] = a.m2[c] + b.m2[c] + d * d * a.n * b.n / m.n;
    }
    return m;
  }
};

// Per-sample kernel; returns the channels for one (r, r') pair.
using SampleFn = std::function<std::array<double, kChannels>(const Vec3&, const Vec3&, const std::array<double, 9>&)>;

std::vector<Moments> run_strata(double k_up, double k_down, const MCParams& mc, const SampleFn& fn,
                                std::uint64_t& n_total) {
  if (mc.strata < 1) throw InputError("strata must be >= 1");
  if (mc.samples < 2) throw InputError("need >= 2 samples");
  if (mc.chunk < 1) throw InputError("chunk must be >= 1");
  const std::size_t S = static_cast<std::size_t>(mc.strata), cells = S * S;
  const std::uint64_t per = std::max<std::uint64_t>(2, (mc.samples + cells - 1) / cells);
  const std::uint64_t chunks = (per + mc.chunk - 1) / mc.chunk;
  n_total = per * cells;
  const std::size_t units = cells * static_cast<std::size_t>(chunks);
  using Acc = std::vector<Moments>;
  auto unit = [&](std::size_t u) {
    Acc acc(cells);
    std::size_t cell = u / chunks;
    std::uint64_t c = u % chunks;
    int iu = static_cast<int>(cell / S), id = static_cast<int>(cell % S);
    std::uint64_t begin = c * mc.chunk, end = std::min<std::uint64_t>(per, begin + mc.chunk);
    auto g = unit_stream(mc.seed, u);
    for (std::uint64_t i = begin; i < end; ++i) {
      Vec3 r = sample_in_shell(g, k_up, iu, mc.strata);
      Vec3 rp = sample_in_shell(g, k_down, id, mc.strata);
      auto rot = random_rotation(g);
      acc[cell].add(fn(r, rp, rot));
    }
    return acc;
  };
  auto combine = [&](const Acc& a, const Acc& b) {
    Acc m(cells);
    for (std::size_t i = 0; i < cells; ++i) m[i] = Moments::merge(a[i], b[i]);
    return m;
  };
  return deterministic_reduce<Acc>(units, unit, combine, Acc(cells));
}

// Stratified mean and standard error of channel c (equal-weight strata).
std::pair<double, double> stratified(const std::vector<Moments>& m, int c) {
  double mean = 0.0, var = 0.0, nc = static_cast<double>(m.size());
  for (const auto& s : m) {
    mean += s.mean[c];
    var += s.n > 1 ? s.m2[c] / (s.n - 1.0) / s.n : 0.0;
  }
  return {mean / nc, std::sqrt(var) / nc};
}

Vec3 rotate(const std::array<double, 9>& R, const Vec3& v) {
  return {R[0] * v[0] + R[1] * v[1] + R[2] * v[2], R[3] * v[0] + R[4] * v[1] + R[5] * v[2],
          R[6] * v[0] + R[7] * v[1] + R[8] * v[2]};
}

void check_common(double k_up, double k_down, double eps) {
  if (!(k_up >= 0.0) || !(k_down >= 0.0)) throw InputError("Fermi momenta must be >= 0");
  if (!(eps >= 0.0)) throw InputError("eps must be >= 0");
}

// Sorted unique values of cand inside [lo, hi], with lo and hi included.
std::vector<double> edges_in(double lo, double hi, std::initializer_list<double> cand) {
  std::vector<double> e{lo, hi};
  for (double c : cand)
    if (c > lo && c < hi) e.push_back(c);
  std::sort(e.begin(), e.end());
  e.erase(std::unique(e.begin(), e.end()), e.end());
  return e;
}

// Adds geometric sub-edges toward `at` inside the panel that touches it.
void grade_toward(std::vector<double>& e, double at) {
  if (e.size() < 2) return;
  bool left = std::fabs(e.front() - at) <= 1e-15 * (1.0 + std::fabs(at));
  bool right = std::fabs(e.back() - at) <= 1e-15 * (1.0 + std::fabs(at));
  if (!left && !right) return;
  double other = left ? e[1] : e[e.size() - 2];
  double len = std::fabs(other - at), sgn = left ? 1.0 : -1.0;
  for (double f : {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 0.05, 0.2}) e.push_back(at + sgn * f * len);
  std::sort(e.begin(), e.end());
}

double profile_series_b(double k_up, double k_down, double eps, double p) {
  double v2 = ball_volume(k_up) * ball_volume(k_down);
  double a2 = k_up * k_up, b2 = k_down * k_down;
  double m2 = (a2 + b2) / 5.0;
  double m4 = 3.0 * a2 * a2 / 35.0 + 6.0 * (a2 / 5.0) * (b2 / 5.0) + 3.0 * b2 * b2 / 35.0;
  double p2 = p * p, e = eps / p2;
  return v2 / (2.0 * p2) * (e - m2 / p2 - e * e + 3.0 * e * m2 / p2 - m4 / (p2 * p2));
}

// int_P^inf p^2 b(p) dp from the series.
double profile_tail(double k_up, double k_down, double eps, double P) {
  double v2 = ball_volume(k_up) * ball_volume(k_down);
  double a2 = k_up * k_up, b2 = k_down * k_down;
  double m2 = (a2 + b2) / 5.0;
  double m4 = 3.0 * a2 * a2 / 35.0 + 6.0 * (a2 / 5.0) * (b2 / 5.0) + 3.0 * b2 * b2 / 35.0;
  return 0.5 * v2 * ((eps - m2) / P + (3.0 * eps * m2 - eps * eps - m4) / (3.0 * P * P * P));
}

// Above this multiple of max(k) the series replaces the 2D quadrature.
constexpr double kSeriesFactor = 40.0;

std::vector<double> p_breaks(double k_up, double k_down, double P) {
  return edges_in(0.0, P, {std::fabs(k_up - k_down), k_up, k_down, k_up + k_down, 2 * k_up, 2 * k_down,
                           4 * std::max(k_up, k_down), 10 * std::max(k_up, k_down)});
}

template <class F>
double integrate_edges(F f, const std::vector<double>& e, double tol = 1e-11, unsigned depth = 12) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < e.size(); ++i)
    if (e[i + 1] > e[i]) s += gauss_kronrod<double, 61>::integrate(f, e[i], e[i + 1], depth, tol);
  return s;
}

}  // namespace

double pauli_closed_form(double k_up, double k_down) {
  check_common(k_up, k_down, 0.0);
  double ru = density_from_kf(k_up), rd = density_from_kf(k_down);
  double hi = std::max(ru, rd), lo = std::min(ru, rd);
  return hi > 0.0 ? std::pow(hi, 7.0 / 3.0) * F(lo / hi) : 0.0;
}

MCEstimate pauli_blocked_integral(double k_up, double k_down, double eps, const MCParams& mc) {
  check_common(k_up, k_down, eps);
  MCEstimate est;
  est.seed = mc.seed;
  if (k_up == 0.0 || k_down == 0.0) return est;
  const AngularRule rule = product_rule(mc.n_theta, mc.n_phi);
  SampleFn fn = [&](const Vec3& r, const Vec3& rp, const std::array<double, 9>& rot) {
    double rr = dot(r, r), rrp = dot(rp, rp), acc = 0.0;
    Vec3 w{r[0] - rp[0], r[1] - rp[1], r[2] - rp[2]};
    for (std::size_t i = 0; i < rule.dir.size(); ++i) {
      Vec3 om = rotate(rot, rule.dir[i]);
      double s1 = exit_plus(-dot(om, r), rr, k_up);
      double s2 = exit_plus(dot(om, rp), rrp, k_down);
      acc += rule.w[i] * radial_closed(std::max(s1, s2), dot(om, w), eps);
    }
    return std::array<double, kChannels>{acc, 0.0, 0.0};
  };
  std::uint64_t n = 0;
  auto m = run_strata(k_up, k_down, mc, fn, n);
  auto [mean, se] = stratified(m, 0);
  double pref = ball_volume(k_up) * ball_volume(k_down) / (8.0 * std::pow(kPi, 7));
  est.value = pref * mean;
  est.std_error = pref * se;
  est.n_samples = n;
  for (std::size_t c = 0; c < m.size(); ++c) {
    StratumStat s;
    s.i_up = static_cast<int>(c / static_cast<std::size_t>(mc.strata));
    s.i_down = static_cast<int>(c % static_cast<std::size_t>(mc.strata));
    s.n = static_cast<std::uint64_t>(m[c].n);
    s.mean = pref * m[c].mean[0];
    s.std_error = m[c].n > 1 ? pref * std::sqrt(m[c].m2[0] / (m[c].n - 1.0) / m[c].n) : 0.0;
    est.breakdown.push_back(s);
  }
  return est;
}

double pauli_profile(double k_up, double k_down, double eps, double p) {
  check_common(k_up, k_down, eps);
  if (!(p > 0.0) || k_up == 0.0 || k_down == 0.0) return 0.0;
  const double xlo = std::max(-k_up, -0.5 * p), xhi = k_up;
  const double ylo = -k_down, yhi = std::min(k_down, 0.5 * p);
  if (!(xhi > xlo) || !(yhi > ylo)) return 0.0;
  auto ex = edges_in(xlo, xhi, {k_up - p, -k_up - p, -0.5 * p});
  auto ey = edges_in(ylo, yhi, {p - k_down, p + k_down, 0.5 * p});
  if (xlo == -0.5 * p) grade_toward(ex, xlo);
  if (yhi == 0.5 * p) grade_toward(ey, yhi);
  std::vector<double> xn, xw, yn, yw;
  composite_gl(ex, 20, xn, xw);
  composite_gl(ey, 20, yn, yw);
  const double ku2 = k_up * k_up, kd2 = k_down * k_down, p2 = p * p;
  std::vector<double> ay(yn.size());
  for (std::size_t j = 0; j < yn.size(); ++j)
    ay[j] = yw[j] * kPi * std::max(0.0, std::min(kd2 - yn[j] * yn[j], p2 - 2.0 * yn[j] * p));
  double total = 0.0;
  for (std::size_t i = 0; i < xn.size(); ++i) {
    double ax = xw[i] * kPi * std::max(0.0, std::min(ku2 - xn[i] * xn[i], 2.0 * xn[i] * p + p2));
    if (ax == 0.0) continue;
    double c = p2 + p * xn[i] + eps, inner = 0.0;
    for (std::size_t j = 0; j < yn.size(); ++j) inner += ay[j] / (c - p * yn[j]);
    total += ax * inner;
  }
  return 0.5 * total;
}

double pauli_profile_b(double k_up, double k_down, double eps, double p) {
  check_common(k_up, k_down, eps);
  if (!(p > 0.0)) throw InputError("profile needs p > 0");
  if (k_up == 0.0 || k_down == 0.0) return 0.0;
  if (p >= kSeriesFactor * std::max(k_up, k_down)) return profile_series_b(k_up, k_down, eps, p);
  return ball_volume(k_up) * ball_volume(k_down) / (2.0 * p * p) - pauli_profile(k_up, k_down, eps, p);
}

double pauli_blocked_integral_profile(double k_up, double k_down, double eps) {
  check_common(k_up, k_down, eps);
  if (k_up == 0.0 || k_down == 0.0) return 0.0;
  double P = kSeriesFactor * std::max(k_up, k_down);
  auto f = [&](double p) { return p > 0.0 ? p * p * pauli_profile_b(k_up, k_down, eps, p) : 0.0; };
  double I = integrate_edges(f, p_breaks(k_up, k_down, P)) + profile_tail(k_up, k_down, eps, P);
  return 4.0 * kPi * I / (8.0 * std::pow(kPi, 7));
}

double angular_integrand(const Vec3& r, const Vec3& rp, double k_up, double k_down, double eps, double s,
                         int n_theta, int n_phi) {
  check_common(k_up, k_down, eps);
  if (!(s > 0.0)) throw InputError("s must be positive");
  const AngularRule rule = product_rule(n_theta, n_phi);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.dir.size(); ++i) {
    const Vec3& om = rule.dir[i];
    Vec3 a{r[0] + s * om[0], r[1] + s * om[1], r[2] + s * om[2]};
    Vec3 b{rp[0] - s * om[0], rp[1] - s * om[1], rp[2] - s * om[2]};
    double val = 1.0 / (2.0 * s * s);
    if (dot(a, a) > k_up * k_up && dot(b, b) > k_down * k_down) {
      double den = dot(a, a) - dot(r, r) + dot(b, b) - dot(rp, rp) + 2.0 * eps;
      val -= 1.0 / den;
    }
    acc += rule.w[i] * val;
  }
  return acc / (4.0 * kPi);
}

double angular_tail_exponent(const Vec3& r, const Vec3& rp, double k_up, double k_down, double eps,
                             double s_lo, double s_hi) {
  if (!(s_hi > s_lo) || !(s_lo > 0.0)) throw InputError("need 0 < s_lo < s_hi");
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < 8; ++i) {
    double s = s_lo * std::pow(s_hi / s_lo, i / 7.0);
    pts.emplace_back(s, std::fabs(angular_integrand(r, rp, k_up, k_down, eps, s)));
  }
  return loglog_fit(pts).slope;
}

double correction_continuum(const ScatteringSolution& sol, double k_up, double k_down, double eps,
                            double p_cut) {
  check_common(k_up, k_down, eps);
  if (!(p_cut > 0.0)) throw InputError("p_cut must be positive");
  if (k_up == 0.0 || k_down == 0.0 || sol.a == 0.0) return 0.0;
  auto f = [&](double p) {
    if (p <= 0.0) return 0.0;
    double w = scattering_w(sol, p);
    return p * p * w * w * pauli_profile(k_up, k_down, eps, p);
  };
  auto e = p_breaks(k_up, k_down, p_cut);
  double I = integrate_edges(f, e, 1e-10);
  return 4.0 * kPi * I / std::pow(2.0 * kPi, 9);
}

namespace {

// (2 pi)^-9 4 pi int_0^inf p^2 (W^2 - W0^2) b(p) dp
double deficit_integral(const ScatteringSolution& sol, double k_up, double k_down, double eps) {
  const double W0 = 8.0 * kPi * sol.a, W02 = W0 * W0;
  const double P = kSeriesFactor * std::max(k_up, k_down);
  const double Pw = std::max(P, 400.0 / sol.support);
  auto f = [&](double p) {
    if (p <= 0.0) return 0.0;
    double w = scattering_w(sol, p);
    return p * p * (w * w - W02) * pauli_profile_b(k_up, k_down, eps, p);
  };
  std::vector<double> e = p_breaks(k_up, k_down, P);
  double step = 0.5 / sol.support;
  for (double x = P + step; x < Pw; x += step) e.push_back(x);
  e.push_back(Pw);
  double I = integrate_edges(f, e, 1e-10);
  I += -W02 * profile_tail(k_up, k_down, eps, Pw);
  return 4.0 * kPi * I / std::pow(2.0 * kPi, 9);
}

struct TailMoments {
  double s_m = 0.0;
  std::vector<double> M;  // M[n] = int_{s_m}^inf W^2 s^-n ds, n >= 1
};

TailMoments tail_moments(const ScatteringSolution& sol, double s_m, int nmax) {
  TailMoments t;
  t.s_m = s_m;
  t.M.assign(static_cast<std::size_t>(nmax) + 1, 0.0);
  double Pw = std::max(2.0 * s_m, 400.0 / sol.support), step = 0.5 / sol.support;
  std::vector<double> e{s_m};
  for (double x = s_m + step; x < Pw; x += step) e.push_back(x);
  e.push_back(Pw);
  std::vector<double> xn, xw;
  composite_gl(e, 16, xn, xw);
  for (std::size_t j = 0; j < xn.size(); ++j) {
    double w = scattering_w(sol, xn[j]), w2 = w * w * xw[j], inv = 1.0 / xn[j], pw = inv;
    for (int n = 1; n <= nmax; ++n, pw *= inv) t.M[static_cast<std::size_t>(n)] += w2 * pw;
  }
  return t;
}

CorrResult corr_profile(const ScatteringSolution& sol, const SpinDensities& d, double eps) {
  CorrResult res;
  res.method = "profile";
  const double ku = d.kf_up(), kd = d.kf_down();
  const double rr = d.rho_up * d.rho_down;
  const double a = sol.a;
  double g_eps = pauli_blocked_integral_profile(ku, kd, eps);
  double g_zero = eps == 0.0 ? g_eps : pauli_blocked_integral_profile(ku, kd, 0.0);
  double closed = pauli_closed_form(ku, kd);
  double delta = deficit_integral(sol, ku, kd, eps);
  double vphi = sol.int_v_one_minus_phi_sq(), grad = sol.int_grad_phi_sq();
  double ident = vphi - 2.0 * grad - 8.0 * kPi * a;
  res.reference = 8.0 * kPi * a * rr + a * a * closed;
  res.value = rr * (vphi - 2.0 * grad) + a * a * g_eps + delta;
  res.second_term = res.value - rr * vphi;
  res.deficit = rr * ident + a * a * (g_eps - closed) + delta;
  res.std_error = std::fabs(a * a * (g_zero - closed)) + std::fabs(rr * ident);
  res.deficit_error = res.std_error;
  return res;
}

CorrResult corr_mc(const ScatteringSolution& sol, const SpinDensities& d, double eps, const MCParams& mc) {
  CorrResult res;
  res.method = "monte_carlo";
  const double ku = d.kf_up(), kd = d.kf_down();
  const double rr = d.rho_up * d.rho_down, a = sol.a;
  const double W0 = 8.0 * kPi * a, W02 = W0 * W0;
  const double s_m = 8.0 * (ku + kd);
  const int nmax = 16;
  const TailMoments tm = tail_moments(sol, s_m, nmax);
  const WTable wt(sol, 1.02 * s_m, 4096);
  const AngularRule rule = product_rule(mc.n_theta, mc.n_phi);
  auto [gx, gw] = gauss_legendre(6);
  SampleFn fn = [&](const Vec3& r, const Vec3& rp, const std::array<double, 9>& rot) {
    double rr_ = dot(r, r), rrp = dot(rp, rp), x0 = 0.0, xw = 0.0;
    Vec3 w{r[0] - rp[0], r[1] - rp[1], r[2] - rp[2]};
    std::array<double, nmax + 2> h{};
    for (std::size_t i = 0; i < rule.dir.size(); ++i) {
      Vec3 om = rotate(rot, rule.dir[i]);
      double s1 = exit_plus(-dot(om, r), rr_, ku);
      double s2 = exit_plus(dot(om, rp), rrp, kd);
      double ss = std::max(s1, s2), b = dot(om, w);
      x0 += rule.w[i] * radial_closed(ss, b, eps);
      // int_0^{s*} W^2 / 2
      double part = 0.0;
      for (std::size_t j = 0; j < gx.size(); ++j) {
        double s = 0.5 * ss * (1.0 + gx[j]), wv = wt(s);
        part += 0.25 * ss * gw[j] * wv * wv;
      }
      // int_{s*}^{s_m} W^2 g, with W^2(s*) pulled out in closed form
      double ws = wt(ss), ws2 = ws * ws, len = s_m - ss;
      part += ws2 * k_segment(ss, s_m, b, eps);
      double prev = 0.0;
      for (double f : {1e-4, 1e-3, 1e-2, 0.05, 0.2, 0.5, 1.0}) {
        double lo = ss + prev * len, hi = ss + f * len, mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        for (std::size_t j = 0; j < gx.size(); ++j) {
          double s = mid + half * gx[j], wv = wt(s);
          double q = s * s + b * s + eps;
          part += half * gw[j] * (wv * wv - ws2) * (b * s + eps) / (2.0 * q);
        }
        prev = f;
      }
      // int_{s_m}^inf W^2 g from the 1/s series of g
      h[0] = 1.0;
      h[1] = -b;
      for (int n = 2; n <= nmax; ++n) h[n] = -b * h[n - 1] - eps * h[n - 2];
      for (int n = 1; n <= nmax; ++n) {
        double gn = 0.5 * (b * h[n - 1] + (n >= 2 ? eps * h[n - 2] : 0.0));
        part += gn * tm.M[static_cast<std::size_t>(n)];
      }
      xw += rule.w[i] * part;
    }
    return std::array<double, kChannels>{x0, xw - W02 * x0, xw};
  };
  std::uint64_t n = 0;
  auto m = run_strata(ku, kd, mc, fn, n);
  const double C = ball_volume(ku) * ball_volume(kd) / std::pow(2.0 * kPi, 9);
  double vphi = sol.int_v_one_minus_phi_sq(), grad = sol.int_grad_phi_sq();
  double ident = vphi - 2.0 * grad - 8.0 * kPi * a;
  double closed = pauli_closed_form(ku, kd);
  res.reference = 8.0 * kPi * a * rr + a * a * closed;
  // Control variate: the W0 channel has a known mean, exact at eps = 0 and
  // from the deterministic profile otherwise.
  double g_known = eps == 0.0 ? closed : pauli_blocked_integral_profile(ku, kd, eps);
  auto [dy, dy_se] = stratified(m, 1);
  res.value = rr * (vphi - 2.0 * grad) + a * a * g_known + C * dy;
  res.std_error = C * dy_se;
  res.second_term = res.value - rr * vphi;
  res.deficit = rr * ident + a * a * (g_known - closed) + C * dy;
  res.deficit_error = res.std_error;
  res.n_samples = n;
  return res;
}

}  // namespace

CorrResult corr_constant(const ScatteringSolution& sol, const SpinDensities& d, double eps, CorrMethod method,
                         const MCParams& mc) {
  if (!(eps >= 0.0)) throw InputError("eps must be >= 0");
  if (d.rho_up == 0.0 || d.rho_down == 0.0 || sol.a == 0.0) {
    CorrResult r;
    r.method = method == CorrMethod::profile ? "profile" : "monte_carlo";
    return r;
  }
  return method == CorrMethod::profile ? corr_profile(sol, d, eps) : corr_mc(sol, d, eps, mc);
}

DomainSplit domain_split_report(const ScatteringSolution& sol, const SpinDensities& d, double eps,
                                double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0 / 6.0)) throw InputError("gamma must lie in (0, 1/6)");
  if (!(eps >= 0.0)) throw InputError("eps must be >= 0");
  DomainSplit ds;
  const double ku = d.kf_up(), kd = d.kf_down();
  ds.split = std::pow(d.total(), 1.0 / 3.0 - gamma);
  if (ku == 0.0 || kd == 0.0 || sol.a == 0.0) return ds;
  const double v2 = ball_volume(ku) * ball_volume(kd), norm = 4.0 * kPi / std::pow(2.0 * kPi, 9);
  const double Pw = std::max(2.0 * ds.split, 400.0 / sol.support), step = 0.5 / sol.support;
  auto w2 = [&](double p) {
    double w = scattering_w(sol, p);
    return w * w;
  };
  auto pauli_part = [&](double p) {
    if (p <= 0.0) return 0.0;
    double pa = p >= kSeriesFactor * std::max(ku, kd) ? v2 / (2.0 * p * p) - profile_series_b(ku, kd, eps, p)
                                                      : pauli_profile(ku, kd, eps, p);
    return p * p * w2(p) * pa;
  };
  auto edges = [&](double lo, double hi) {
    std::vector<double> e = edges_in(lo, hi, {std::fabs(ku - kd), ku, kd, ku + kd, 2 * ku, 2 * kd});
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < e.size(); ++i) {
      out.push_back(e[i]);
      for (double x = e[i] + step; x < e[i + 1]; x += step) out.push_back(x);
    }
    out.push_back(hi);
    return out;
  };
  auto inner_edges = edges(0.0, ds.split), outer_edges = edges(ds.split, Pw);
  ds.inner = -norm * integrate_edges(pauli_part, inner_edges, 1e-10);
  // Outer Pauli part: the profile beyond Pw is v2 / (2 p^2) to leading order,
  // and W^2 is negligible there. Panels are at most 0.5 / R wide, so one
  // Kronrod pass each; relative-tolerance refinement stalls on the W^2 tail.
  ds.outer = -norm * integrate_edges(pauli_part, outer_edges, 1e-10, 0);
  auto half_w2 = [&](double p) { return 0.5 * w2(p); };
  double ct_in = norm * v2 * integrate_edges(half_w2, inner_edges, 1e-12);
  double ct_out_p = norm * v2 * integrate_edges(half_w2, outer_edges, 1e-12, 0);
  ds.grad_term = 2.0 * d.rho_up * d.rho_down * sol.int_grad_phi_sq();
  ds.counterterm_inner = ct_in;
  ds.counterterm_outer = -(ds.grad_term - ct_out_p);
  ds.cancellation = ds.counterterm_inner + ds.counterterm_outer;
  ds.outer_residual = ds.outer - (-ds.grad_term + ds.counterterm_inner);
  ds.second_term = ds.inner + ds.outer;
  return ds;
}

}  // namespace hyk
