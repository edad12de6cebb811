#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "hyk/errors.hpp"
#include "hyk/fockcheck.hpp"

using namespace hyk;

namespace {

struct Setup {
  MomentumLattice lat;
  FockSpace fs;
  KernelSet ks;
};

Setup make(const std::string& preset) {
  FockPreset p = fock_preset(preset);
  SpinDensities d(density_from_kf(p.kf), density_from_kf(p.kf));
  MomentumLattice lat = build_lattice(p.L, d, p.kf + 8.0 * std::numbers::pi / p.L);
  FockSpace fs(lat, p.modes);
  auto sol = solve_zero_energy(RadialPotential::square_well(p.v0, p.range));
  long kmax = 0;
  for (const Mode& m : fs.modes()) kmax = std::max(kmax, norm2(m.k));
  return Setup{lat, fs, make_kernels(sol, p.L, 16 * kmax + 16)};
}

double max_abs(const Op& a) {
  double m = 0.0;
  for (int k = 0; k < a.outerSize(); ++k)
    for (Op::InnerIterator it(a, k); it; ++it) m = std::max(m, std::fabs(it.value()));
  return m;
}

}  // namespace

TEST_CASE("creation operators anticommute on the vacuum") {
  auto s = make("prop34-tiny");
  auto vac = s.fs.basis_state(0);
  Eigen::VectorXd a = s.fs.create(0) * (s.fs.create(1) * vac);
  Eigen::VectorXd b = s.fs.create(1) * (s.fs.create(0) * vac);
  CHECK(a.norm() == doctest::Approx(1.0));
  CHECK((a + b).norm() < 1e-15);
  CHECK(std::fabs(a[3]) == doctest::Approx(1.0));
  CHECK((s.fs.create(0) * (s.fs.create(0) * vac)).norm() == 0.0);
  CHECK(s.fs.ffg_bits() != 0u);
}

TEST_CASE("mode bookkeeping") {
  auto s = make("prop34-ball");
  CHECK(s.fs.size() == 8u);
  CHECK(s.fs.dim() == 256u);
  CHECK(s.fs.index(0, {0, 0, 0}) >= 0);
  CHECK(s.fs.index(0, {0, 0, 5}) == -1);
  CHECK(s.fs.selected_in(0, {1, 0, 0}));
  CHECK(s.fs.selected_out(0, {2, 0, 0}));
}

TEST_CASE("too many modes or an unknown preset") {
  auto s = make("prop34-tiny");
  std::vector<std::pair<int, IVec3>> many;
  for (int i = 0; i < 17; ++i) many.push_back({i % 2, {i / 2, 0, 0}});
  CHECK_THROWS_AS(FockSpace(s.lat, many), ResourceError);
  CHECK_THROWS_AS(fock_preset("nope"), InputError);
  CHECK_THROWS_AS(run_fock_checks(fock_preset("rr-2x2"), {"bogus"}, 1), InputError);
}

TEST_CASE("free Hamiltonian is diagonal kinetic energy") {
  auto s = make("prop34-tiny");
  auto zero = scaled_kernel(s.ks.v, 0.0, "zero");
  Op H = hamiltonian(s.fs, zero);
  double u2 = s.fs.unit() * s.fs.unit();
  for (std::uint64_t b = 0; b < s.fs.dim(); ++b) {
    double kin = 0.0;
    for (std::size_t j = 0; j < s.fs.size(); ++j)
      if (b >> j & 1) kin += u2 * norm2(s.fs.modes()[j].k);
    auto e = s.fs.basis_state(b);
    CHECK(e.dot(H * e) == doctest::Approx(kin).epsilon(1e-14));
    CHECK((H * e - kin * e).norm() < 1e-14);
  }
  // lowest levels fill the smallest momenta: 0, then |e1|^2 per extra particle
  auto levels = tiny_ed(s.fs, H, 1);
  for (const auto& sp : levels) {
    double want = u2 * (std::max(0, sp.n_up - 1) + std::max(0, sp.n_down - 1));
    CAPTURE(sp.n_up);
    CAPTURE(sp.n_down);
    CHECK(sp.lowest.at(0) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("Fermi state energy") {
  auto s = make("prop34-tiny");
  Op H = hamiltonian(s.fs, s.ks.v);
  auto psi = s.fs.basis_state(s.fs.ffg_bits());
  double L3 = std::pow(s.fs.L(), 3);
  CHECK(psi.dot(H * psi) == doctest::Approx(s.ks.v.at_zero() / L3).epsilon(1e-13));
  CHECK(ffg_constant(s.fs, s.ks.v) == doctest::Approx(s.ks.v.at_zero() / L3).epsilon(1e-13));
  auto nc = number_conservation(s.fs, H);
  CHECK(nc[0] < 1e-13);
  CHECK(nc[1] < 1e-13);
}

TEST_CASE("kernel lookups beyond the table throw") {
  auto s = make("rr-2x2");
  CHECK_THROWS_AS(s.ks.v({100, 0, 0}), InputError);
  CHECK(s.ks.w.at_zero() == 0.0);
}

TEST_CASE("Bethe-Goldstone kernel needs a positive gap") {
  auto s = make("rr-2x2");
  IVec3 r{0, 0, 0}, rp{0, 0, 0}, p{1, 0, 0};
  CHECK(std::isfinite(omega_eps(s.fs, s.ks.w, r, rp, p, 0.05)));
  // r + p drops back into the ball: the two gaps cancel
  CHECK_THROWS_AS(omega_eps(s.fs, s.ks.w, {1, 0, 0}, rp, {-1, 0, 0}, 0.0), DomainError);
}

TEST_CASE("the cross term needs the one-half weight") {
  // Build int V phi (S* A + h.c.) without the 1/2; it is twice the cubic term.
  auto s = make("prop34-q3");
  const auto& fs = s.fs;
  Op q3 = q3_term(fs, s.ks.vphi);
  REQUIRE(op_norm(q3) > 1e-3);
  OpBuilder b(fs);
  for (int sg = 0; sg < 2; ++sg) {
    int t = 1 - sg;
    std::vector<Field> A{{1, t, Filter::u, false}, {0, sg, Filter::u, false}};
    std::vector<Field> w1{{0, sg, Filter::u, true}, {1, t, Filter::v, false}};
    std::vector<Field> w2{{1, t, Filter::u, true}, {0, sg, Filter::v, false}};
    w1.insert(w1.end(), A.begin(), A.end());
    w2.insert(w2.end(), A.begin(), A.end());
    add_pair_integral(b, fs, s.ks.vphi, w1, 1.0);
    add_pair_integral(b, fs, s.ks.vphi, w2, -1.0);
  }
  Op half = b.build();
  Op full = half + Op(half.transpose());
  CHECK(op_norm(Op(full - 2.0 * q3)) < 1e-12 * op_norm(q3));
  CHECK(op_norm(Op(0.5 * full - q3)) < 1e-12 * op_norm(q3));
}

TEST_CASE("Fock check suite") {
  for (const auto& name : fock_preset_names()) {
    CAPTURE(name);
    auto res = run_fock_checks(fock_preset(name), {}, 7);
    REQUIRE(!res.empty());
    for (const auto& r : res) {
      CAPTURE(r.name);
      CAPTURE(r.value);
      CHECK(r.pass);
    }
  }
}

TEST_CASE("the square identity holds term by term where the cubic part is live") {
  auto s = make("prop34-q3");
  auto v = verify_vphi_square_identity(s.fs, s.ks);
  CHECK(v.global < 1e-10);
  CHECK(v.dec1 < 1e-10);
  CHECK(v.dec2 < 1e-10);
  CHECK(v.dec3 < 1e-10);
  CHECK(v.dec4 < 1e-10);
  CHECK(v.dec5 < 1e-10);
  CHECK(v.subspace == 0.0);
  CHECK(v.projector < 1e-14);
}

TEST_CASE("particle-hole map sends the vacuum to the Fermi state") {
  auto s = make("conj-4x4");
  Op R = particle_hole(s.fs);
  Eigen::VectorXd out = R * s.fs.basis_state(0);
  Eigen::VectorXd ffg = s.fs.basis_state(s.fs.ffg_bits());
  CHECK(std::fabs(std::fabs(out.dot(ffg)) - 1.0) < 1e-14);
  CHECK(max_abs(Op(Op(R.transpose()) * R - s.fs.identity())) < 1e-14);
}

TEST_CASE("dimension and relation check") {
  auto s = make("rr-2x2");
  CHECK(s.fs.dim() == 16u);
  auto t = make("prop34-tiny");
  CHECK(particle_hole_relation_residual(t.fs, t.fs.basis_state(0)) == 0.0);
  // one up particle outside the ball and none inside violates N_in = N_out
  std::uint64_t bad = std::uint64_t{1} << t.fs.index(0, {1, 0, 0});
  CHECK(particle_hole_relation_residual(t.fs, t.fs.basis_state(bad)) > 0.5);
}

TEST_CASE("correlation Hamiltonian pieces") {
  auto s = make("prop34-ball");
  auto c = build_correlation_terms(s.fs, s.ks.v);
  auto dh = to_dense(c.h0), dq4 = to_dense(c.q4), dq2 = to_dense(c.q2);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e0(dh), e4(dq4);
  CHECK(e0.eigenvalues().minCoeff() >= -1e-10);
  CHECK(e4.eigenvalues().minCoeff() >= -1e-10);
  CHECK((dq2 - dq2.transpose()).norm() <= 1e-12 * dq2.norm());
  // H0 is diagonal with entries sum over occupied modes of ||k|^2 - k_F^2|
  double u2 = s.fs.unit() * s.fs.unit();
  for (std::uint64_t b = 0; b < s.fs.dim(); ++b) {
    double want = 0.0;
    for (std::size_t j = 0; j < s.fs.size(); ++j)
      if (b >> j & 1) {
        const Mode& m = s.fs.modes()[j];
        want += std::fabs(u2 * norm2(m.k) - s.fs.k_f(m.spin) * s.fs.k_f(m.spin));
      }
    CHECK(dh(static_cast<long>(b), static_cast<long>(b)) == doctest::Approx(want).epsilon(1e-13));
  }
  CHECK(std::fabs(dh.norm() - dh.diagonal().norm()) < 1e-13 * dh.norm());
}

TEST_CASE("zero kernels make every identity trivial") {
  auto s = make("prop34-tiny");
  KernelSet z;
  z.v = scaled_kernel(s.ks.v, 0.0, "V");
  z.vphi = scaled_kernel(s.ks.vphi, 0.0, "Vphi");
  z.vphi2 = scaled_kernel(s.ks.vphi2, 0.0, "Vphi2");
  z.vf = scaled_kernel(s.ks.vf, 0.0, "Vf");
  z.w = scaled_kernel(s.ks.w, 0.0, "W");
  auto v = verify_vphi_square_identity(s.fs, z);
  CHECK(v.lhs_norm == 0.0);
  CHECK(v.global == 0.0);
  auto c = make("conj-4x4");
  auto rep = conjugation_lower_bound_check(c.fs, scaled_kernel(c.ks.v, 0.0, "zero"), 20, 3);
  CHECK(std::fabs(rep.min_gap) < 1e-14);
  CHECK(std::fabs(rep.ffg_gap) < 1e-14);
}

TEST_CASE("conjugation gap at the Fermi state") {
  auto c = make("conj-ball");
  auto rep = conjugation_lower_bound_check(c.fs, c.ks.v, 100, 11);
  CHECK(rep.trials == 100);
  CHECK(rep.min_gap >= -1e-10);
  CHECK(rep.ffg_gap >= 0.0);
  CHECK(rep.ffg_gap == doctest::Approx(rep.ffg_equal_spin).epsilon(1e-10));
}

TEST_CASE("exact diagonalization bounds") {
  auto s = make("prop34-ball");
  Op H = hamiltonian(s.fs, s.ks.v);
  Op H0 = hamiltonian(s.fs, scaled_kernel(s.ks.v, 0.0, "zero"));
  auto with = tiny_ed(s.fs, H, 1), without = tiny_ed(s.fs, H0, 1);
  REQUIRE(with.size() == without.size());
  auto psi = s.fs.basis_state(s.fs.ffg_bits());
  double effg = psi.dot(H * psi);
  int nb[2] = {0, 0};
  for (const Mode& m : s.fs.modes()) nb[m.spin] += m.in_ball ? 1 : 0;
  bool seen = false;
  for (std::size_t i = 0; i < with.size(); ++i) {
    CHECK(with[i].lowest.at(0) >= without[i].lowest.at(0) - 1e-12);
    if (with[i].n_up == nb[0] && with[i].n_down == nb[1]) {
      seen = true;
      CHECK(with[i].lowest.at(0) <= effg + 1e-12);
    }
  }
  CHECK(seen);
}
