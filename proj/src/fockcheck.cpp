#include "hyk/fockcheck.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "hyk/errors.hpp"
#include "hyk/potential.hpp"

namespace hyk {

namespace {

IVec3 add(const IVec3& a, const IVec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
IVec3 sub(const IVec3& a, const IVec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
IVec3 neg(const IVec3& a) { return {-a[0], -a[1], -a[2]}; }

double max_abs(const Op& a) {
  double m = 0.0;
  for (int k = 0; k < a.outerSize(); ++k)
    for (Op::InnerIterator it(a, k); it; ++it) m = std::max(m, std::fabs(it.value()));
  return m;
}

Letter letter(const FockSpace& fs, int spin, const IVec3& k, bool dag) {
  int j = fs.index(spin, k);
  if (j < 0) throw InputError("momentum outside the selected mode set");
  return Letter{j, dag};
}

std::vector<IVec3> ball_modes(const FockSpace& fs, int spin, bool inside) {
  std::vector<IVec3> out;
  for (const Mode& m : fs.modes())
    if (m.spin == spin && m.in_ball == inside) out.push_back(m.k);
  return out;
}

double rel(const Op& a, const Op& b) {
  double n = std::max({1.0, op_norm(a), op_norm(b)});
  return op_norm(Op(a - b)) / n;
}

// Piece of X = A + T + S: coeff * phi^power * (two fields).
struct Piece {
  double c;
  int power;
  std::vector<Field> f;
  Piece adjoint() const {
    Piece p{c, power, {}};
    for (auto it = f.rbegin(); it != f.rend(); ++it) {
      Field g = *it;
      g.dagger = !g.dagger;
      p.f.push_back(g);
    }
    return p;
  }
};

const TransferKernel& kernel_for_power(const KernelSet& k, int m) {
  if (m == 0) return k.v;
  if (m == 1) return k.vphi;
  if (m == 2) return k.vphi2;
  throw InputError("phi power above 2");
}

Op pair_products(const FockSpace& fs, const KernelSet& k, const std::vector<Piece>& left,
                 const std::vector<Piece>& right, double coeff) {
  OpBuilder b(fs);
  for (const Piece& l : left)
    for (const Piece& r : right) {
      std::vector<Field> f = l.f;
      f.insert(f.end(), r.f.begin(), r.f.end());
      add_pair_integral(b, fs, kernel_for_power(k, l.power + r.power), f, coeff * l.c * r.c);
    }
  return b.build();
}

std::vector<Piece> adjoint(const std::vector<Piece>& x) {
  std::vector<Piece> out;
  for (const Piece& p : x) out.push_back(p.adjoint());
  return out;
}

Field F(int point, int spin, Filter f, bool dag) { return Field{point, spin, f, dag}; }

}  // namespace

double car_residual(const FockSpace& fs) {
  const int M = static_cast<int>(fs.size());
  std::vector<Op> a(static_cast<std::size_t>(M)), ad(static_cast<std::size_t>(M));
  for (int j = 0; j < M; ++j) {
    a[static_cast<std::size_t>(j)] = fs.annihilate(j);
    ad[static_cast<std::size_t>(j)] = fs.create(j);
  }
  Op I = fs.identity();
  double r = 0.0;
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      const Op& ai = a[static_cast<std::size_t>(i)];
      const Op& aj = a[static_cast<std::size_t>(j)];
      const Op& adj = ad[static_cast<std::size_t>(j)];
      Op c1 = ai * adj + adj * ai;
      if (i == j) c1 -= I;
      Op c2 = ai * aj + aj * ai;
      r = std::max({r, max_abs(c1), max_abs(c2)});
    }
  return r;
}

ParticleHoleReport particle_hole_report(const FockSpace& fs) {
  ParticleHoleReport rep;
  Op R = particle_hole(fs);
  Eigen::VectorXd om = fs.basis_state(0);
  Eigen::VectorXd ffg = fs.basis_state(fs.ffg_bits());
  rep.vacuum = (R * om - ffg).norm();
  Op RtR = Op(R.transpose()) * R;
  rep.unitarity = max_abs(Op(RtR - fs.identity()));
  for (std::size_t j = 0; j < fs.size(); ++j) {
    const Mode& m = fs.modes()[j];
    Op conj = Op(R.transpose()) * fs.create(static_cast<int>(j)) * R;
    Op expect = m.in_ball ? fs.annihilate(fs.index(m.spin, neg(m.k))) : fs.create(static_cast<int>(j));
    rep.conjugation = std::max(rep.conjugation, max_abs(Op(conj - expect)));
  }
  return rep;
}

double particle_hole_relation_residual(const FockSpace& fs, const Eigen::VectorXd& psi) {
  double r = 0.0;
  for (int s = 0; s < 2; ++s) {
    Op nin = fs.number_ball(s, true), nout = fs.number_ball(s, false), n = fs.number(s);
    r = std::max(r, (nin * psi - nout * psi).norm());
    r = std::max(r, (nin * psi - 0.5 * (n * psi)).norm());
  }
  return r;
}

Eigen::VectorXd random_sector_state(const FockSpace& fs, int n_up, int n_down, std::uint64_t seed) {
  std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x666f636bU};
  std::mt19937_64 g(sq);
  std::normal_distribution<double> nd;
  std::uint64_t up_mask = 0;
  for (std::size_t j = 0; j < fs.size(); ++j)
    if (fs.modes()[j].spin == 0) up_mask |= std::uint64_t{1} << j;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<long>(fs.dim()));
  for (std::uint64_t b = 0; b < fs.dim(); ++b)
    if (std::popcount(b & up_mask) == n_up && std::popcount(b & ~up_mask) == n_down)
      v[static_cast<long>(b)] = nd(g);
  double n = v.norm();
  if (n == 0.0) throw InputError("empty particle-number sector");
  return v / n;
}

VphiIdentity verify_vphi_square_identity(const FockSpace& fs, const KernelSet& k) {
  VphiIdentity out;
  const double L3 = fs.L() * fs.L() * fs.L();
  Op lhs = q4_term(fs, k.v) + q2_term(fs, k.vphi) + q3_term(fs, k.vphi);
  out.lhs_norm = op_norm(lhs);

  Op square(static_cast<long>(fs.dim()), static_cast<long>(fs.dim()));
  Op d1 = square, d2 = square, tt = square, ss = square, ts = square;
  for (int s = 0; s < 2; ++s) {
    int t = 1 - s;
    std::vector<Piece> A{{1.0, 0, {F(1, t, Filter::u, false), F(0, s, Filter::u, false)}}};
    std::vector<Piece> T{{1.0, 1, {F(1, t, Filter::v, true), F(0, s, Filter::v, true)}}};
    std::vector<Piece> S{{1.0, 1, {F(1, t, Filter::v, true), F(0, s, Filter::u, false)}},
                         {-1.0, 1, {F(0, s, Filter::v, true), F(1, t, Filter::u, false)}}};
    std::vector<Piece> X = A;
    X.insert(X.end(), T.begin(), T.end());
    X.insert(X.end(), S.begin(), S.end());
    square += pair_products(fs, k, adjoint(X), X, 0.5);
    d1 += pair_products(fs, k, adjoint(T), A, 0.5);
    d2 += pair_products(fs, k, adjoint(S), A, 0.5);
    tt += pair_products(fs, k, adjoint(T), T, 0.5);
    ss += pair_products(fs, k, adjoint(S), S, 0.5);
    ts += pair_products(fs, k, adjoint(T), S, 0.5);
  }
  d1 = Op(d1 + Op(d1.transpose()));
  d2 = Op(d2 + Op(d2.transpose()));

  // Normal-ordered right-hand sides.
  const double g0 = k.vphi2.at_zero();
  Op nv[2], nu[2];
  for (int s = 0; s < 2; ++s) {
    nv[s] = fs.number_ball(s, true);
    nu[s] = fs.number_ball(s, false);
  }
  OpBuilder q0(fs), es(fs), ets(fs);
  for (int s = 0; s < 2; ++s) {
    int t = 1 - s;
    add_pair_integral(q0, fs, k.vphi2,
                      {F(0, s, Filter::v, true), F(1, t, Filter::v, true), F(1, t, Filter::v, false),
                       F(0, s, Filter::v, false)},
                      0.5);
    add_pair_integral(es, fs, k.vphi2,
                      {F(0, s, Filter::u, true), F(1, t, Filter::v, true), F(1, t, Filter::v, false),
                       F(0, s, Filter::u, false)},
                      -1.0);
    add_pair_integral(es, fs, k.vphi2,
                      {F(0, s, Filter::u, true), F(0, s, Filter::v, true), F(1, t, Filter::v, false),
                       F(1, t, Filter::u, false)},
                      1.0);
    add_pair_integral(ets, fs, k.vphi2,
                      {F(1, t, Filter::v, true), F(0, s, Filter::v, false), F(1, t, Filter::v, false),
                       F(0, s, Filter::u, false)},
                      1.0);
  }
  Op D3 = fs.identity() * (fs.rho(0) * fs.rho(1) * L3 * g0) + q0.build();
  Op D4 = es.build();
  for (int s = 0; s < 2; ++s) {
    int t = 1 - s;
    D3 -= nv[t] * (fs.rho(s) * g0);
    D4 += nu[s] * (fs.rho(t) * g0);
  }
  Op D5 = ets.build();

  out.dec1 = rel(d1, q2_term(fs, k.vphi));
  out.dec2 = rel(d2, q3_term(fs, k.vphi));
  out.dec3 = rel(tt, D3);
  out.dec4 = rel(ss, D4);
  out.dec5 = rel(ts, D5);
  Op rhs = square - D3 - D4 - D5 - Op(D5.transpose());
  out.global = rel(lhs, rhs);

  // Particle-hole subspace: n_in = n_out for each spin.
  std::vector<Eigen::Triplet<double>> pt;
  for (std::uint64_t b = 0; b < fs.dim(); ++b) {
    bool ok = true;
    for (int s = 0; s < 2; ++s) {
      int nin = 0, nout = 0;
      for (std::size_t j = 0; j < fs.size(); ++j)
        if (fs.modes()[j].spin == s && (b >> j & 1)) (fs.modes()[j].in_ball ? nin : nout)++;
      ok = ok && nin == nout;
    }
    if (ok) pt.emplace_back(static_cast<int>(b), static_cast<int>(b), 1.0);
  }
  Op P(static_cast<long>(fs.dim()), static_cast<long>(fs.dim()));
  P.setFromTriplets(pt.begin(), pt.end());
  for (int s = 0; s < 2; ++s) out.subspace = std::max(out.subspace, max_abs(Op(P * (nv[s] - nu[s]) * P)));
  // Same projector from the sector N_sigma = |B_sigma| through R.
  std::vector<Eigen::Triplet<double>> nt;
  int nb[2] = {0, 0};
  for (const Mode& m : fs.modes()) nb[m.spin] += m.in_ball ? 1 : 0;
  for (std::uint64_t b = 0; b < fs.dim(); ++b) {
    int n[2] = {0, 0};
    for (std::size_t j = 0; j < fs.size(); ++j)
      if (b >> j & 1) n[fs.modes()[j].spin]++;
    if (n[0] == nb[0] && n[1] == nb[1]) nt.emplace_back(static_cast<int>(b), static_cast<int>(b), 1.0);
  }
  Op PN(static_cast<long>(fs.dim()), static_cast<long>(fs.dim()));
  PN.setFromTriplets(nt.begin(), nt.end());
  Op R = particle_hole(fs);
  out.projector = max_abs(Op(Op(R.transpose()) * PN * R - P));
  return out;
}

bool tt_admissible(const MomentumLattice& lat, const TTTuple& t) {
  int sp = 1 - t.sigma;
  return lat.in_ball(sp, t.s) && lat.in_ball(sp, t.rp) && !lat.in_ball(sp, sub(t.rp, t.p)) &&
         !lat.in_ball(sp, sub(t.s, t.q));
}

std::vector<TTTuple> sample_tt_tuples(const MomentumLattice& lat, int count, std::uint64_t seed) {
  std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x74747475U};
  std::mt19937_64 g(sq);
  std::vector<TTTuple> out;
  auto rnd = [&](int m) {
    std::uniform_int_distribution<int> d(-m, m);
    return IVec3{d(g), d(g), d(g)};
  };
  int guard = 0;
  while (static_cast<int>(out.size()) < count) {
    if (++guard > 100000) throw ConvergenceError("could not sample admissible tuples");
    TTTuple t;
    t.sigma = static_cast<int>(out.size() % 2);
    int sp = 1 - t.sigma;
    const auto& ball = lat.ball[static_cast<std::size_t>(sp)];
    if (ball.empty()) throw InputError("sampling needs a nonempty Fermi ball");
    std::uniform_int_distribution<std::size_t> pick(0, ball.size() - 1);
    t.rp = ball[pick(g)];
    t.p = rnd(2);
    t.r = rnd(2);
    if (out.size() % 5 == 0) {
      t.s = t.rp;
      t.q = t.p;
    } else {
      t.s = ball[pick(g)];
      t.q = (out.size() % 5 == 1) ? t.p : rnd(2);
    }
    if (tt_admissible(lat, t)) out.push_back(t);
  }
  return out;
}

double verify_tt_anticommutator(const MomentumLattice& lat, const TTTuple& t) {
  if (!tt_admissible(lat, t)) throw InputError("tuple violates the Pauli constraints");
  const int s = t.sigma, sp = 1 - t.sigma;
  std::set<std::pair<int, IVec3>> need{{s, sub(t.p, t.r)},     {s, sub(t.q, t.r)},   {sp, sub(t.rp, t.p)},
                                       {sp, neg(t.rp)},        {sp, neg(t.s)},       {sp, sub(t.s, t.q)}};
  FockSpace fs(lat, std::vector<std::pair<int, IVec3>>(need.begin(), need.end()));
  auto L = [&](int spin, const IVec3& k, bool d) { return letter(fs, spin, k, d); };
  OpBuilder ab(fs), bb(fs);
  ab.add(1.0, {L(s, sub(t.p, t.r), false), L(sp, sub(t.rp, t.p), false), L(sp, neg(t.rp), false)});
  bb.add(1.0, {L(sp, neg(t.s), true), L(sp, sub(t.s, t.q), true), L(s, sub(t.q, t.r), true)});
  Op A = ab.build(), B = bb.build();
  Op lhs = A * B + B * A;

  OpBuilder rb(fs);
  bool drs = t.rp == t.s, dpq = t.p == t.q, dd = sub(t.rp, t.p) == sub(t.s, t.q);
  if (drs && dpq) {
    rb.add_identity(1.0);
    rb.add(-1.0, {L(s, sub(t.p, t.r), true), L(s, sub(t.p, t.r), false)});
    rb.add(-1.0, {L(sp, sub(t.rp, t.p), true), L(sp, sub(t.rp, t.p), false)});
    rb.add(-1.0, {L(sp, neg(t.rp), true), L(sp, neg(t.rp), false)});
  }
  if (drs)
    rb.add(1.0, {L(sp, sub(t.rp, t.q), true), L(s, sub(t.q, t.r), true), L(s, sub(t.p, t.r), false),
                 L(sp, sub(t.rp, t.p), false)});
  if (dd)
    rb.add(1.0, {L(sp, neg(t.s), true), L(s, sub(t.q, t.r), true), L(s, sub(t.p, t.r), false),
                 L(sp, neg(t.rp), false)});
  if (dpq)
    rb.add(1.0, {L(sp, neg(t.s), true), L(sp, sub(t.s, t.p), true), L(sp, sub(t.rp, t.p), false),
                 L(sp, neg(t.rp), false)});
  return max_abs(Op(lhs - rb.build()));
}

namespace {

struct RRContext {
  const FockSpace& fs;
  const TransferKernel& w;
  double eps;
  bool U(int s, const IVec3& k) const { return fs.selected_out(s, k); }
  bool V(int s, const IVec3& k) const { return fs.selected_in(s, k); }
  double kin(int s, const IVec3& k) const { return std::fabs(fs.momentum2(k) - fs.k_f(s) * fs.k_f(s)); }
  double lam(const IVec3& p, const IVec3& r) const { return fs.momentum2(add(r, p)) - fs.momentum2(r); }
  double om(const IVec3& r, const IVec3& rp, const IVec3& p) const { return omega_eps(fs, w, r, rp, p, eps); }
  Letter a(int s, const IVec3& k) const { return letter(fs, s, k, false); }
  Letter ad(int s, const IVec3& k) const { return letter(fs, s, k, true); }
};

}  // namespace

Op t_star(const FockSpace& fs, const TransferKernel& w, int sigma, const IVec3& r, double eps) {
  RRContext c{fs, w, eps};
  const int sp = 1 - sigma;
  const double L3 = fs.L() * fs.L() * fs.L();
  OpBuilder b(fs);
  for (const IVec3& rp : ball_modes(fs, sp, true))
    for (const IVec3& m : ball_modes(fs, sp, false)) {
      IVec3 p = sub(rp, m);  // r' - p = m
      IVec3 pr = sub(p, r);
      double coef = 0.0;
      if (c.V(sigma, r) && c.U(sigma, pr)) coef += c.om(neg(r), rp, p);
      if (c.U(sigma, r) && c.V(sigma, sub(r, p))) coef -= c.om(sub(r, p), rp, p);
      if (coef == 0.0) continue;
      b.add(coef / L3, {c.a(sigma, pr), c.a(sp, m), c.a(sp, neg(rp))});
    }
  return b.build();
}

std::array<Op, 10> rr_terms(const FockSpace& fs, const TransferKernel& w, double eps) {
  RRContext c{fs, w, eps};
  const double L3 = fs.L() * fs.L() * fs.L(), L6 = L3 * L3;
  std::vector<OpBuilder> I(10, OpBuilder(fs));
  for (int s = 0; s < 2; ++s) {
    const int sp = 1 - s;
    for (const IVec3& r : ball_modes(fs, s, true))
      for (const IVec3& m : ball_modes(fs, s, false)) {
        IVec3 p = sub(m, r);  // r + p = m
        for (const IVec3& rp : ball_modes(fs, sp, true)) {
          IVec3 rpp = sub(rp, p);
          if (!c.U(sp, rpp)) continue;
          double w1 = c.om(r, rp, p) / L6;
          double o2 = c.om(r, rp, p) * w1;
          double lm = c.lam(p, r);
          I[0].add_identity(lm * o2);
          I[1].add(-lm * o2, {c.ad(sp, neg(rp)), c.a(sp, neg(rp))});
          I[2].add(-c.kin(s, m) * o2, {c.ad(s, neg(r)), c.a(s, neg(r))});
          I[8].add(-lm * o2, {c.ad(sp, rpp), c.a(sp, rpp)});
          I[9].add(-c.kin(s, r) * o2, {c.ad(s, m), c.a(s, m)});
          for (const IVec3& t : ball_modes(fs, s, true)) {
            IVec3 q = sub(m, t);  // r + p - q = t
            IVec3 x = add(rpp, q);
            if (c.V(sp, x))
              I[3].add(c.kin(s, m) * w1 * c.om(t, x, q), {c.ad(sp, neg(x)), c.ad(s, neg(t)), c.a(s, neg(r)),
                                                          c.a(sp, neg(rp))});
            IVec3 y = sub(rp, q);
            if (c.U(sp, y))
              I[6].add(c.kin(s, m) * w1 * c.om(t, rp, q), {c.ad(sp, y), c.ad(s, neg(t)), c.a(s, neg(r)),
                                                           c.a(sp, rpp)});
          }
          for (const IVec3& t : ball_modes(fs, s, false)) {
            IVec3 q = sub(t, r);  // r + q = t
            IVec3 y = sub(rp, q);
            if (c.U(sp, y))
              I[4].add(c.kin(s, r) * w1 * c.om(r, rp, q), {c.ad(sp, y), c.ad(s, t), c.a(s, m), c.a(sp, rpp)});
            IVec3 x = add(rpp, q);
            if (c.V(sp, x))
              I[7].add(c.kin(s, r) * w1 * c.om(r, x, q), {c.ad(sp, neg(x)), c.ad(s, t), c.a(s, m),
                                                          c.a(sp, neg(rp))});
          }
          for (const IVec3& sv : ball_modes(fs, sp, true)) {
            IVec3 z = sub(sv, p);
            if (c.U(sp, z))
              I[5].add(lm * w1 * c.om(r, sv, p), {c.ad(sp, neg(sv)), c.ad(sp, z), c.a(sp, rpp), c.a(sp, neg(rp))});
          }
        }
      }
  }
  std::array<Op, 10> out;
  for (std::size_t j = 0; j < 10; ++j) out[j] = I[j].build();
  return out;
}

RRReport verify_rr_decomposition(const FockSpace& fs, const TransferKernel& w, double eps) {
  if (!(eps > 0.0)) throw InputError("eps must be positive");
  RRContext c{fs, w, eps};
  Op lhs(static_cast<long>(fs.dim()), static_cast<long>(fs.dim()));
  for (int s = 0; s < 2; ++s)
    for (const Mode& m : fs.modes()) {
      if (m.spin != s) continue;
      Op ts = t_star(fs, w, s, m.k, eps);
      Op t = Op(ts.transpose());
      lhs += Op(ts * t + t * ts) * c.kin(s, m.k);
    }
  auto I = rr_terms(fs, w, eps);
  Op sum = I[0];
  for (std::size_t j = 1; j < 10; ++j) sum += I[j];
  RRReport rep;
  rep.lhs_norm = op_norm(lhs);
  rep.residual = rel(lhs, sum);
  for (std::size_t j = 0; j < 10; ++j) {
    Eigen::MatrixXd d = to_dense(I[j]);
    rep.norm[j] = d.norm();
    rep.asym[j] = (d - d.transpose()).cwiseAbs().maxCoeff();
    Eigen::MatrixXd h = 0.5 * (d + d.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
    rep.min_eig[j] = es.eigenvalues().minCoeff();
    rep.max_eig[j] = es.eigenvalues().maxCoeff();
  }
  return rep;
}

ConjugationReport conjugation_lower_bound_check(const FockSpace& fs, const TransferKernel& v, int trials,
                                                std::uint64_t seed) {
  if (trials < 1) throw InputError("need at least one trial");
  ConjugationReport rep;
  rep.trials = trials;
  Op H = hamiltonian(fs, v), Heq = equal_spin_interaction(fs, v);
  Op Hc = build_correlation_terms(fs, v).total();
  Op R = particle_hole(fs);
  Op Rt = Op(R.transpose());
  double E = ffg_constant(fs, v);
  int nb[2] = {0, 0};
  for (const Mode& m : fs.modes()) nb[m.spin] += m.in_ball ? 1 : 0;
  auto gap_of = [&](const Eigen::VectorXd& psi, double& eq) {
    Eigen::VectorXd phi = Rt * psi;
    eq = psi.dot(Heq * psi);
    return psi.dot(H * psi) - E - phi.dot(Hc * phi);
  };
  rep.min_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < trials; ++i) {
    Eigen::VectorXd psi = random_sector_state(fs, nb[0], nb[1], seed + static_cast<std::uint64_t>(i));
    double eq = 0.0, g = gap_of(psi, eq);
    rep.min_gap = std::min(rep.min_gap, g);
    rep.max_identity_gap = std::max(rep.max_identity_gap, std::fabs(g - eq));
  }
  Eigen::VectorXd ffg = fs.basis_state(fs.ffg_bits());
  rep.ffg_gap = gap_of(ffg, rep.ffg_equal_spin);
  return rep;
}

std::vector<SectorSpectrum> tiny_ed(const FockSpace& fs, const Op& H, int per_sector) {
  if (H.rows() != static_cast<long>(fs.dim())) throw InputError("operator does not match the Fock space");
  Op asym = H - Op(H.transpose());
  if (max_abs(asym) > 1e-12 * std::max(1.0, max_abs(H))) throw InputError("tiny_ed needs a hermitian operator");
  int n_modes[2] = {0, 0};
  for (const Mode& m : fs.modes()) n_modes[m.spin]++;
  std::vector<SectorSpectrum> out;
  Eigen::MatrixXd Hd;
  if (fs.dim() <= 4096) Hd = Eigen::MatrixXd(H);
  else throw ResourceError("tiny_ed limited to dim 4096");
  for (int nu = 0; nu <= n_modes[0]; ++nu)
    for (int nd = 0; nd <= n_modes[1]; ++nd) {
      std::vector<long> idx;
      for (std::uint64_t b = 0; b < fs.dim(); ++b) {
        int n[2] = {0, 0};
        for (std::size_t j = 0; j < fs.size(); ++j)
          if (b >> j & 1) n[fs.modes()[j].spin]++;
        if (n[0] == nu && n[1] == nd) idx.push_back(static_cast<long>(b));
      }
      Eigen::MatrixXd blk(idx.size(), idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j) blk(static_cast<long>(i), static_cast<long>(j)) = Hd(idx[i], idx[j]);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(blk, Eigen::EigenvaluesOnly);
      SectorSpectrum sp{nu, nd, {}};
      for (long i = 0; i < std::min<long>(per_sector, es.eigenvalues().size()); ++i)
        sp.lowest.push_back(es.eigenvalues()[i]);
      out.push_back(std::move(sp));
    }
  return out;
}

std::array<double, 2> number_conservation(const FockSpace& fs, const Op& H) {
  std::array<double, 2> r{};
  for (int s = 0; s < 2; ++s) {
    Op N = fs.number(s);
    r[static_cast<std::size_t>(s)] = op_norm(Op(H * N - N * H));
  }
  return r;
}

FockPreset fock_preset(const std::string& name) {
  FockPreset p;
  p.name = name;
  p.L = 10.0;
  p.v0 = 1.0;
  p.range = 1.0;
  p.eps = 0.05;
  const double unit = 2.0 * std::numbers::pi / p.L;
  const IVec3 o{0, 0, 0}, e1{1, 0, 0}, m1{-1, 0, 0}, e2{0, 1, 0}, m2{0, -1, 0}, e3{0, 0, 1};
  if (name == "prop34-tiny") {
    p.kf = 0.5 * unit;
    p.modes = {{0, o}, {0, e1}, {0, m1}, {1, o}, {1, e1}, {1, m1}};
  } else if (name == "prop34-ball") {
    p.kf = 1.2 * unit;
    p.modes = {{0, o}, {0, e1}, {0, m1}, {0, {2, 0, 0}}, {1, o}, {1, e1}, {1, m1}, {1, {-2, 0, 0}}};
  } else if (name == "prop34-q3") {
    p.kf = 0.5 * unit;
    p.modes = {{0, o}, {0, e1}, {0, m1}, {0, {2, 0, 0}}, {1, o}, {1, e1}, {1, m1}, {1, {2, 0, 0}}};
  } else if (name == "rr-2x2") {
    p.kf = 0.5 * unit;
    p.modes = {{0, o}, {0, e1}, {1, o}, {1, m1}};
  } else if (name == "rr-3x3") {
    p.kf = 0.5 * unit;
    p.modes = {{0, o}, {0, e1}, {0, e2}, {1, o}, {1, m1}, {1, m2}};
  } else if (name == "rr-ball") {
    p.kf = 1.2 * unit;
    p.modes = {{0, o}, {0, e1}, {0, m1}, {0, {2, 0, 0}}, {1, o}, {1, e1}, {1, m1}, {1, {-2, 0, 0}}};
  } else if (name == "conj-4x4") {
    p.kf = 0.5 * unit;
    p.modes = {{0, o}, {0, e1}, {0, m1}, {0, e3}, {1, o}, {1, e1}, {1, m1}, {1, e3}};
  } else if (name == "conj-ball") {
    p.kf = 1.2 * unit;
    p.modes = {{0, o}, {0, e1}, {0, m1}, {0, e2}, {0, m2}, {1, o}, {1, e1}, {1, m1}, {1, e2}, {1, m2}};
  } else {
    throw InputError("unknown Fock preset '" + name + "'");
  }
  return p;
}

std::vector<std::string> fock_preset_names() {
  return {"prop34-tiny", "prop34-ball", "prop34-q3", "rr-2x2", "rr-3x3", "rr-ball", "conj-4x4", "conj-ball"};
}

std::vector<CheckResult> run_fock_checks(const FockPreset& preset, const std::vector<std::string>& checks,
                                         std::uint64_t seed, const std::string& kernel) {
  static const std::vector<std::string> all{"car",   "particle-hole", "relation",    "vphi", "tt",
                                            "rr",    "signs",         "conjugation", "number", "ed"};
  std::vector<std::string> todo = checks.empty() ? all : checks;
  for (const auto& c : todo)
    if (std::find(all.begin(), all.end(), c) == all.end()) throw InputError("unknown check '" + c + "'");
  if (kernel != "v" && kernel != "vphi" && kernel != "vf") throw InputError("kernel must be v, vphi or vf");

  SpinDensities d(density_from_kf(preset.kf), density_from_kf(preset.kf));
  MomentumLattice lat = build_lattice(preset.L, d, preset.kf + 4.0 * 2.0 * std::numbers::pi / preset.L);
  FockSpace fs(lat, preset.modes);
  long kmax = 0;
  for (const Mode& m : fs.modes()) kmax = std::max(kmax, norm2(m.k));
  auto sol = solve_zero_energy(RadialPotential::square_well(preset.v0, preset.range), GridSpec{});
  KernelSet ks = make_kernels(sol, preset.L, 16 * kmax + 16);
  const TransferKernel& g = kernel == "vphi" ? ks.vphi : kernel == "vf" ? ks.vf : ks.v;

  std::vector<CheckResult> out;
  auto push = [&](std::string n, double v, double tol, bool pass, std::string detail = {}) {
    out.push_back(CheckResult{std::move(n), v, tol, pass, std::move(detail)});
  };
  auto has = [&](const char* n) { return std::find(todo.begin(), todo.end(), n) != todo.end(); };
  int nb[2] = {0, 0};
  for (const Mode& m : fs.modes()) nb[m.spin] += m.in_ball ? 1 : 0;

  if (has("car")) {
    double r = car_residual(fs);
    push("car", r, 1e-13, r <= 1e-13);
  }
  if (has("particle-hole")) {
    auto ph = particle_hole_report(fs);
    double r = std::max({ph.vacuum, ph.unitarity, ph.conjugation});
    std::ostringstream os;
    os << "vacuum=" << ph.vacuum << " unitarity=" << ph.unitarity << " conjugation=" << ph.conjugation;
    push("particle-hole", r, 1e-12, r <= 1e-12, os.str());
  }
  if (has("relation")) {
    Op R = particle_hole(fs);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
      Eigen::VectorXd psi = Op(R.transpose()) * random_sector_state(fs, nb[0], nb[1], seed + 77 + i);
      worst = std::max(worst, particle_hole_relation_residual(fs, psi));
    }
    push("relation", worst, 1e-12, worst <= 1e-12);
  }
  if (has("vphi")) {
    auto v = verify_vphi_square_identity(fs, ks);
    std::ostringstream os;
    os << "dec1=" << v.dec1 << " dec2=" << v.dec2 << " dec3=" << v.dec3 << " dec4=" << v.dec4
       << " dec5=" << v.dec5 << " subspace=" << v.subspace << " projector=" << v.projector;
    push("vphi", v.global, 1e-10, v.global <= 1e-10, os.str());
    double sub = std::max(v.subspace, v.projector);
    push("vphi-subspace", sub, 1e-10, sub <= 1e-10);
  }
  if (has("tt")) {
    double worst = 0.0;
    auto tuples = sample_tt_tuples(lat, 20, seed + 11);
    for (const auto& t : tuples) worst = std::max(worst, verify_tt_anticommutator(lat, t));
    double swapped = 0.0;
    for (auto t : tuples) {
      t.sigma = 1 - t.sigma;
      if (tt_admissible(lat, t)) swapped = std::max(swapped, verify_tt_anticommutator(lat, t));
    }
    std::ostringstream os;
    os << "tuples=20 swapped=" << swapped;
    double r = std::max(worst, swapped);
    push("tt", r, 1e-12, r <= 1e-12, os.str());
  }
  if (has("rr") || has("signs")) {
    auto rr = verify_rr_decomposition(fs, ks.w, preset.eps);
    if (has("rr")) push("rr", rr.residual, 1e-9, rr.residual <= 1e-9);
    if (has("signs")) {
      double scale = std::max(1.0, rr.lhs_norm);
      for (int j : {8, 9}) {
        double m = rr.max_eig[static_cast<std::size_t>(j)] / scale;
        push("I" + std::to_string(j + 1) + "<=0", m, 1e-10, m <= 1e-10 && rr.asym[static_cast<std::size_t>(j)] <= 1e-12);
      }
      for (int j = 3; j <= 7; ++j) {
        double m = rr.min_eig[static_cast<std::size_t>(j)] / scale;
        std::ostringstream os;
        os << "asym=" << rr.asym[static_cast<std::size_t>(j)] << " max_eig=" << rr.max_eig[static_cast<std::size_t>(j)];
        push("I" + std::to_string(j + 1) + ">=0", m, -1e-10,
             m >= -1e-10 && rr.asym[static_cast<std::size_t>(j)] <= 1e-12 * scale, os.str());
      }
    }
  }
  if (has("conjugation")) {
    auto c = conjugation_lower_bound_check(fs, g, 100, seed + 1000);
    std::ostringstream os;
    os << "identity=" << c.max_identity_gap << " ffg_gap=" << c.ffg_gap << " ffg_equal_spin=" << c.ffg_equal_spin;
    push("conjugation", c.min_gap, -1e-10, c.min_gap >= -1e-10, os.str());
  }
  if (has("number")) {
    auto nc = number_conservation(fs, hamiltonian(fs, g));
    double r = std::max(nc[0], nc[1]);
    push("number", r, 1e-11, r <= 1e-11);
  }
  if (has("ed")) {
    Op H = hamiltonian(fs, g);
    auto sp = tiny_ed(fs, H, 1);
    Eigen::VectorXd ffg = fs.basis_state(fs.ffg_bits());
    double eff = ffg.dot(H * ffg);
    double egs = 0.0;
    for (const auto& s : sp)
      if (s.n_up == nb[0] && s.n_down == nb[1]) egs = s.lowest.front();
    push("ed-variational", egs - eff, 1e-10, egs <= eff + 1e-10);
  }
  return out;
}

}  // namespace hyk
