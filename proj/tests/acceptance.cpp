// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "hyk/fit.hpp"
#include "hyk/fockcheck.hpp"
#include "hyk/hyformula.hpp"
#include "hyk/lattice.hpp"
#include "hyk/parallel.hpp"
#include "hyk/paulisum.hpp"
#include "hyk/potential.hpp"
#include "hyk/scattering.hpp"

using namespace hyk;
constexpr double kPi = std::numbers::pi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

Outcome c1() {
  constexpr double frozen = 51.390283318691813984;  // 40-digit evaluation
  double closed = F_at_one_closed_form();
  double e1 = rel(F(1.0), closed), e2 = rel(F_factored(1.0), closed), e3 = rel(closed, frozen);
  double worst = std::max({e1, e2, e3});
  return {worst <= 1e-12, fmt("F(1)=%.17g rel(limit)=%.2e rel(factored)=%.2e rel(40-digit)=%.2e", F(1.0), e1, e2, e3)};
}

Outcome c2() {
  double worst = 0.0;
  for (double x : {0.125, 0.25, 0.5, 2.0, 4.0, 8.0})
    worst = std::max(worst, std::fabs(F(x) - std::pow(x, 7.0 / 3.0) * F(1.0 / x)) / F(x));
  return {worst <= 1e-10, fmt("max rel asymmetry %.2e (tol 1e-10)", worst)};
}

Outcome c3() {
  bool ok = true;
  std::string d;
  for (double x : {1.0, 0.5, 2.0}) {
    double ku = 1.0, kd = std::cbrt(x);
    MCParams mc;
    mc.samples = 1000000;
    auto e = pauli_blocked_integral(ku, kd, 0.0, mc);
    double c = pauli_closed_form(ku, kd);
    double sig = std::fabs(e.value - c) / e.std_error, r = rel(e.value, c);
    ok = ok && sig <= 3.0 && r <= 0.01;
    d += fmt("x=%g: rel %.2e, %.2f se; ", x, r, sig);
  }
  d += fmt("%d workers", thread_count());
  return {ok, d};
}

Outcome c4() {
  auto sol = solve_zero_energy(RadialPotential::square_well(2.0, 1.0));
  double a_ref = 1.0 - std::tanh(1.0);
  double ea = std::fabs(sol.a - a_ref);
  double ef = std::fabs(sol.int_v_f() - 8.0 * kPi * sol.a);
  double ee = energy_identity_residual(sol);
  return {ea <= 1e-8 && ef <= 1e-8 && ee <= 1e-6,
          fmt("a=%.15f |a-(1-tanh 1)|=%.2e |int Vf - 8 pi a|=%.2e energy identity rel %.2e", sol.a, ea, ef, ee)};
}

Outcome c5() {
  auto sol = solve_zero_energy(RadialPotential::square_well(2.0, 1.0));
  std::vector<std::pair<double, double>> pts;
  bool lower = true;
  double worst = 0.0;
  for (double rho : {1e-5, 1.78e-5, 3.16e-5, 5.62e-5, 1e-4}) {
    auto r = corr_constant(sol, SpinDensities::symmetric(rho), 0.0);
    lower = lower && r.deficit >= -r.deficit_error;
    worst = std::min(worst, r.deficit / r.reference);
    pts.emplace_back(rho, r.deficit);
  }
  if (!lower) return {false, "corr_constant below the reference beyond its error"};
  auto fit = loglog_fit(pts, true);
  return {fit.slope >= 2.38, fmt("deficit >= -err at all 5 densities; slope %.4f over rho 1e-5..1e-4 (need >= 2.38)",
                                 fit.slope)};
}

Outcome c6() {
  const double kf = 2.0;
  SpinDensities d(density_from_kf(kf), density_from_kf(kf));
  double cont = 0.6 * std::pow(6.0 * kPi * kPi, 2.0 / 3.0) * 2.0 * std::pow(d.rho_up, 5.0 / 3.0);
  std::vector<std::pair<double, double>> kin;
  for (int i = 0; i < 16; ++i) {
    double L = 100.0 + i * 100.0 / 15.0;
    kin.emplace_back(L, ffg_energy(build_lattice(L, d, kf + 0.1), 0.0).kinetic_per_volume);
  }
  auto ex = extrapolate(kin);
  double ek = rel(ex.value, cont);

  auto sol = solve_zero_energy(RadialPotential::truncated_gaussian(1.0, 1.0, 5.0));
  const double pc = 8.0, eps = 0.01;
  double worst = 0.0;
  for (double L : {20.0, 24.0}) {
    auto lat = build_lattice(L, d, pc);
    auto per = periodize(sol, L, 0.1, pc, d.total());
    double s = correction_lattice_sum(lat, per, eps).per_volume;
    double c = correction_continuum(sol, lat.k_f_effective(0), lat.k_f_effective(1), eps, pc);
    worst = std::max(worst, rel(s, c));
  }
  return {ek <= 0.005 && worst <= 0.02,
          fmt("kinetic extrapolation over L=100..200 rel %.2e%s; correction vs continuum at k_F L=40,48 rel %.2e",
              ek, ex.low_confidence ? " (low confidence)" : "", worst)};
}

Outcome c7() {
  auto d = SpinDensities::symmetric(1e-10);
  auto suite = t_integral_suite(d, 0.1, 0.5, 40.0 / d.kf_up());
  bool ok = suite.size() == 5;
  std::string s;
  for (const auto& t : suite) {
    ok = ok && std::fabs(t.fit.slope - t.target) <= 0.05;
    s += fmt("%s %.4f (%.4f) ", t.name.c_str(), t.fit.slope, t.target);
  }
  return {ok, s};
}

Outcome c8() {
  double rho = 1e-6, gamma = 0.1, K3 = 3.0 * std::pow(rho, 1.0 / 3.0 - gamma);
  double L = 20.0 * 2.0 * kPi / K3, t0 = 0.01 / (K3 * K3), t1 = 0.1 / (K3 * K3);
  double worst = 0.0;
  for (int i = 0; i < 6; ++i) {
    double t = t0 * std::pow(t1 / t0, i / 5.0);
    worst = std::max(worst, std::fabs(heat_kernel_norms(t, L, rho, gamma).l1 - 1.0));
  }
  auto fit = heat_kernel_scaling(L, rho, gamma, t0, t1);
  return {worst <= 1e-10 && fit.slope <= -0.70,
          fmt("max |l1 - 1| %.2e; rescaled l2 t-exponent %.4f (need <= -0.70)", worst, fit.slope)};
}

Outcome c9() {
  bool ok = true;
  std::string worst_name;
  int n = 0;
  for (const char* p : {"prop34-tiny", "prop34-q3", "rr-2x2", "conj-4x4"}) {
    for (const auto& r : run_fock_checks(fock_preset(p), {}, 20240601)) {
      ++n;
      if (!r.pass) {
        ok = false;
        worst_name += std::string(p) + ":" + r.name + " ";
      }
    }
  }
  return {ok, ok ? fmt("%d checks on 4 presets within tolerance", n) : "failed: " + worst_name};
}

Outcome c10() {
  auto sol = solve_zero_energy(RadialPotential::square_well(2.0, 1.0));
  SpinDensities d(density_from_kf(1.6), density_from_kf(1.3));
  auto lat = build_lattice(12.0, d, 5.0);
  auto per = periodize(sol, 12.0, 0.1, 5.0, d.total());
  MCParams mc;
  mc.samples = 100000;
  std::vector<std::array<double, 4>> got;
  for (int w : {1, 4, 8}) {
    set_thread_count(w);
    auto e = pauli_blocked_integral(1.0, std::cbrt(0.5), 0.0, mc);
    MCParams small = mc;
    small.samples = 4096;
    auto cc = corr_constant(sol, SpinDensities::symmetric(1e-4), 0.0, CorrMethod::monte_carlo, small);
    got.push_back({e.value, e.std_error, correction_lattice_sum(lat, per, 0.01).value, cc.value});
  }
  set_thread_count(0);
  bool same = got[0] == got[1] && got[0] == got[2];
  return {same, same ? "MC integral, MC correlation constant and lattice sum bit-identical at 1/4/8 workers"
                     : "results differ across worker counts"};
}

}  // namespace

int main() {
  std::setvbuf(stdout, nullptr, _IONBF, 0);
  const std::vector<std::pair<const char*, std::function<Outcome()>>> all{
      {"F(1) agreement", c1},          {"reciprocal symmetry", c2}, {"Pauli integral vs closed form", c3},
      {"scattering oracle", c4},       {"correlation constant", c5}, {"lattice to continuum", c6},
      {"t-integral scalings", c7},     {"heat kernel", c8},          {"Fock identity suite", c9},
      {"determinism", c10}};
  int failed = 0, i = 0;
  for (const auto& [name, fn] : all) {
    ++i;
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2d %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i, name, o.detail.c_str(), s);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed == 0 ? 0 : 1;
}
