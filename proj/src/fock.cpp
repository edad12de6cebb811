#include "hyk/fock.hpp"

#include <algorithm>
#include <bit>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "hyk/errors.hpp"
#include "hyk/potential.hpp"

namespace hyk {

namespace {

constexpr double kPi = std::numbers::pi;

int popcount(std::uint64_t x) { return std::popcount(x); }

bool filter_ok(const Mode& m, Filter f) {
  switch (f) {
    case Filter::u:
      return !m.in_ball;
    case Filter::v:
      return m.in_ball;
    case Filter::all:
      return true;
  }
  return false;
}

bool sum_of_three_squares(long n) {
  if (n == 0) return true;
  while (n % 4 == 0) n /= 4;
  return n % 8 != 7;
}

}  // namespace

FockSpace::FockSpace(const MomentumLattice& lat, std::vector<std::pair<int, IVec3>> selected) {
  if (selected.size() > kMaxModes) throw ResourceError("too many modes for the Fock engine (max 16)");
  L_ = lat.L;
  unit_ = lat.unit;
  k_f_ = lat.k_f;
  std::sort(selected.begin(), selected.end());
  for (std::size_t i = 0; i < selected.size(); ++i) {
    auto [s, k] = selected[i];
    if (s < 0 || s > 1) throw InputError("spin index must be 0 or 1");
    if (i > 0 && selected[i - 1] == selected[i]) throw InputError("duplicate mode in selection");
    modes_.push_back(Mode{s, k, lat.in_ball(s, k)});
  }
}

int FockSpace::index(int spin, const IVec3& k) const {
  for (std::size_t j = 0; j < modes_.size(); ++j)
    if (modes_[j].spin == spin && modes_[j].k == k) return static_cast<int>(j);
  return -1;
}

double FockSpace::momentum2(const IVec3& k) const { return unit_ * unit_ * static_cast<double>(norm2(k)); }

double FockSpace::rho(int spin) const {
  int n = 0;
  for (const Mode& m : modes_) n += (m.spin == spin && m.in_ball) ? 1 : 0;
  return n / (L_ * L_ * L_);
}

bool FockSpace::selected_out(int spin, const IVec3& k) const {
  int j = index(spin, k);
  return j >= 0 && !modes_[static_cast<std::size_t>(j)].in_ball;
}

bool FockSpace::selected_in(int spin, const IVec3& k) const {
  int j = index(spin, k);
  return j >= 0 && modes_[static_cast<std::size_t>(j)].in_ball;
}

Op FockSpace::annihilate(int j) const {
  OpBuilder b(*this);
  b.add(1.0, {{j, false}});
  return b.build();
}

Op FockSpace::create(int j) const {
  OpBuilder b(*this);
  b.add(1.0, {{j, true}});
  return b.build();
}

Op FockSpace::identity() const {
  Op I(static_cast<long>(dim()), static_cast<long>(dim()));
  I.setIdentity();
  return I;
}

Op FockSpace::number(int spin) const {
  OpBuilder b(*this);
  for (std::size_t j = 0; j < modes_.size(); ++j)
    if (modes_[j].spin == spin) b.add(1.0, {{static_cast<int>(j), true}, {static_cast<int>(j), false}});
  return b.build();
}

Op FockSpace::number_ball(int spin, bool inside) const {
  OpBuilder b(*this);
  for (std::size_t j = 0; j < modes_.size(); ++j)
    if (modes_[j].spin == spin && modes_[j].in_ball == inside)
      b.add(1.0, {{static_cast<int>(j), true}, {static_cast<int>(j), false}});
  return b.build();
}

Eigen::VectorXd FockSpace::basis_state(std::uint64_t bits) const {
  if (bits >= dim()) throw InputError("basis index outside the Fock space");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<long>(dim()));
  v[static_cast<long>(bits)] = 1.0;
  return v;
}

std::uint64_t FockSpace::ffg_bits() const {
  std::uint64_t b = 0;
  for (std::size_t j = 0; j < modes_.size(); ++j)
    if (modes_[j].in_ball) b |= std::uint64_t{1} << j;
  return b;
}

void OpBuilder::add(double c, const std::vector<Letter>& word) {
  if (c == 0.0) return;
  const std::uint64_t n = fs_->dim();
  for (std::uint64_t s = 0; s < n; ++s) {
    std::uint64_t st = s;
    double sign = c;
    bool alive = true;
    for (auto it = word.rbegin(); it != word.rend(); ++it) {
      std::uint64_t bit = std::uint64_t{1} << it->mode;
      bool occ = (st & bit) != 0;
      if (occ != !it->dagger) {
        alive = false;
        break;
      }
      if (popcount(st & (bit - 1)) & 1) sign = -sign;
      st ^= bit;
    }
    if (alive) trip_.emplace_back(static_cast<int>(st), static_cast<int>(s), sign);
  }
}

void OpBuilder::add_identity(double c) {
  if (c == 0.0) return;
  for (std::uint64_t s = 0; s < fs_->dim(); ++s) trip_.emplace_back(static_cast<int>(s), static_cast<int>(s), c);
}

Op OpBuilder::build() const {
  Op m(static_cast<long>(fs_->dim()), static_cast<long>(fs_->dim()));
  m.setFromTriplets(trip_.begin(), trip_.end());
  return m;
}

double TransferKernel::operator()(const IVec3& k) const {
  long n = norm2(k);
  if (n > n_max) throw InputError("kernel " + name + " has no coefficient for transfer |k|^2 = " + std::to_string(n));
  return shell[static_cast<std::size_t>(n)];
}

KernelSet make_kernels(const ScatteringSolution& sol, double L, long n_max) {
  if (!(L > 2.0 * sol.support)) throw InputError("box side must exceed twice the support radius");
  if (n_max < 0) throw InputError("n_max must be >= 0");
  KernelSet ks;
  double unit = 2.0 * kPi / L;
  auto init = [&](TransferKernel& t, const char* name) {
    t.name = name;
    t.unit = unit;
    t.n_max = n_max;
    t.shell.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  };
  init(ks.v, "V");
  init(ks.vphi, "Vphi");
  init(ks.vphi2, "Vphi2");
  init(ks.vf, "Vf");
  init(ks.w, "W");
  const RadialPotential& pot = sol.potential;
  std::vector<double> cuts = pot.breakpoints();
  using boost::math::quadrature::gauss_kronrod;
  auto transform = [&](double p, int m) {
    auto f = [&](double r) {
      double ph = sol.phi_at(r), s = p * r;
      double sinc = s < 1e-8 ? 1.0 - s * s / 6.0 : std::sin(s) / s;
      return pot.eval(r) * std::pow(ph, m) * r * r * sinc;
    };
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
      acc += gauss_kronrod<double, 31>::integrate(f, cuts[i], cuts[i + 1], 12, 1e-13);
    return 4.0 * kPi * acc;
  };
  for (long n = 0; n <= n_max; ++n) {
    if (!sum_of_three_squares(n)) continue;
    auto i = static_cast<std::size_t>(n);
    double p = unit * std::sqrt(static_cast<double>(n));
    ks.v.shell[i] = v_hat(pot, p);
    ks.vphi.shell[i] = transform(p, 1);
    ks.vphi2.shell[i] = transform(p, 2);
    ks.vf.shell[i] = ks.v.shell[i] - ks.vphi.shell[i];
    ks.w.shell[i] = n == 0 ? 0.0 : scattering_w(sol, p);
  }
  return ks;
}

TransferKernel scaled_kernel(const TransferKernel& g, double s, const std::string& name) {
  TransferKernel t = g;
  t.name = name;
  for (double& x : t.shell) x *= s;
  return t;
}

namespace {

struct Expander {
  const FockSpace& fs;
  const TransferKernel* g;
  const std::vector<Field>& f;
  double coeff;
  OpBuilder& out;
  std::vector<Letter> word;
  std::vector<std::vector<int>> cand;

  void run(std::size_t i, IVec3 kx, IVec3 ky) {
    const auto& modes = fs.modes();
    if (i + 1 == f.size()) {
      // Last field: momentum fixed by conservation.
      const Field& fl = f[i];
      int s = fl.dagger ? -1 : 1;
      IVec3 tot{kx[0] + ky[0], kx[1] + ky[1], kx[2] + ky[2]};
      IVec3 need{-s * tot[0], -s * tot[1], -s * tot[2]};
      int j = fs.index(fl.spin, need);
      if (j < 0 || !filter_ok(modes[static_cast<std::size_t>(j)], fl.filter)) return;
      IVec3 kxx = kx;
      if (fl.point == 0)
        for (int d = 0; d < 3; ++d) kxx[d] += s * need[d];
      double w = g ? (*g)(kxx) : 1.0;
      word[i] = Letter{j, fl.dagger};
      out.add(coeff * w, word);
      return;
    }
    const Field& fi = f[i];
    int s = fi.dagger ? -1 : 1;
    for (int j : cand[i]) {
      const IVec3& k = modes[static_cast<std::size_t>(j)].k;
      IVec3 nx = kx, ny = ky;
      for (int d = 0; d < 3; ++d) (fi.point == 0 ? nx : ny)[d] += s * k[d];
      word[i] = Letter{j, fi.dagger};
      run(i + 1, nx, ny);
    }
  }
};

void expand(OpBuilder& b, const FockSpace& fs, const TransferKernel* g, const std::vector<Field>& f, double coeff) {
  if (f.empty()) throw InputError("empty field string");
  double L3 = fs.L() * fs.L() * fs.L();
  double c = coeff * std::pow(L3, 1.0 - 0.5 * static_cast<double>(f.size()));
  Expander e{fs, g, f, c, b, std::vector<Letter>(f.size()), {}};
  for (const Field& x : f) {
    if (g == nullptr && x.point != 0) throw InputError("point integral expects every field at x");
    std::vector<int> c2;
    for (std::size_t j = 0; j < fs.size(); ++j)
      if (fs.modes()[j].spin == x.spin && filter_ok(fs.modes()[j], x.filter)) c2.push_back(static_cast<int>(j));
    e.cand.push_back(std::move(c2));
  }
  e.run(0, IVec3{0, 0, 0}, IVec3{0, 0, 0});
}

Field fx(int spin, Filter f, bool dag) { return Field{0, spin, f, dag}; }
Field fy(int spin, Filter f, bool dag) { return Field{1, spin, f, dag}; }

Op with_adjoint(const Op& a) { return Op(a + Op(a.transpose())); }

}  // namespace

void add_pair_integral(OpBuilder& b, const FockSpace& fs, const TransferKernel& g, const std::vector<Field>& f,
                       double coeff) {
  expand(b, fs, &g, f, coeff);
}

void add_point_integral(OpBuilder& b, const FockSpace& fs, const std::vector<Field>& f, double coeff) {
  expand(b, fs, nullptr, f, coeff);
}

Op q2_term(const FockSpace& fs, const TransferKernel& g) {
  OpBuilder b(fs);
  for (int s = 0; s < 2; ++s) {
    int t = 1 - s;
    add_pair_integral(b, fs, g,
                      {fx(s, Filter::u, true), fy(t, Filter::u, true), fy(t, Filter::v, true), fx(s, Filter::v, true)},
                      0.5);
  }
  return with_adjoint(b.build());
}

Op q3_term(const FockSpace& fs, const TransferKernel& g) {
  OpBuilder b(fs);
  for (int s = 0; s < 2; ++s) {
    int t = 1 - s;
    add_pair_integral(b, fs, g,
                      {fy(t, Filter::u, true), fx(s, Filter::u, true), fx(s, Filter::v, true), fy(t, Filter::u, false)},
                      1.0);
  }
  return with_adjoint(b.build());
}

Op q4_term(const FockSpace& fs, const TransferKernel& g) {
  OpBuilder b(fs);
  for (int s = 0; s < 2; ++s) {
    int t = 1 - s;
    add_pair_integral(b, fs, g,
                      {fx(s, Filter::u, true), fy(t, Filter::u, true), fy(t, Filter::u, false), fx(s, Filter::u, false)},
                      0.5);
  }
  return b.build();
}

Op CorrelationTerms::total() const {
  Op t = h0 + q2 + q3 + q4;
  for (const Op& e : e_corr) t += e;
  return t;
}

CorrelationTerms build_correlation_terms(const FockSpace& fs, const TransferKernel& g) {
  CorrelationTerms c;
  {
    OpBuilder b(fs);
    for (std::size_t j = 0; j < fs.size(); ++j) {
      const Mode& m = fs.modes()[j];
      double kf = fs.k_f(m.spin);
      b.add(std::fabs(fs.momentum2(m.k) - kf * kf), {{static_cast<int>(j), true}, {static_cast<int>(j), false}});
    }
    c.h0 = b.build();
  }
  c.q2 = q2_term(fs, g);
  c.q3 = q3_term(fs, g);
  c.q4 = q4_term(fs, g);
  OpBuilder e1(fs), e2(fs), e3(fs), e4(fs);
  for (int s = 0; s < 2; ++s) {
    int t = 1 - s;
    add_pair_integral(e1, fs, g,
                      {fx(s, Filter::v, true), fy(t, Filter::v, true), fy(t, Filter::v, false), fx(s, Filter::v, false)},
                      0.5);
    add_pair_integral(e2, fs, g,
                      {fx(s, Filter::u, true), fx(s, Filter::v, true), fy(t, Filter::v, false), fy(t, Filter::u, false)},
                      1.0);
    add_pair_integral(e3, fs, g,
                      {fx(s, Filter::u, true), fy(t, Filter::v, true), fy(t, Filter::v, false), fx(s, Filter::u, false)},
                      -1.0);
    add_pair_integral(e4, fs, g,
                      {fx(s, Filter::u, true), fy(t, Filter::v, true), fx(s, Filter::v, true), fy(t, Filter::v, false)},
                      1.0);
  }
  c.e_corr = {e1.build(), e2.build(), e3.build(), with_adjoint(e4.build())};
  return c;
}

Op hamiltonian(const FockSpace& fs, const TransferKernel& v) {
  OpBuilder b(fs);
  for (std::size_t j = 0; j < fs.size(); ++j)
    b.add(fs.momentum2(fs.modes()[j].k), {{static_cast<int>(j), true}, {static_cast<int>(j), false}});
  for (int s = 0; s < 2; ++s)
    for (int t = 0; t < 2; ++t)
      add_pair_integral(b, fs, v,
                        {fx(s, Filter::all, true), fy(t, Filter::all, true), fy(t, Filter::all, false),
                         fx(s, Filter::all, false)},
                        0.5);
  return b.build();
}

Op equal_spin_interaction(const FockSpace& fs, const TransferKernel& v) {
  OpBuilder b(fs);
  for (int s = 0; s < 2; ++s)
    add_pair_integral(
        b, fs, v,
        {fx(s, Filter::all, true), fy(s, Filter::all, true), fy(s, Filter::all, false), fx(s, Filter::all, false)},
        0.5);
  return b.build();
}

double ffg_constant(const FockSpace& fs, const TransferKernel& v) {
  double kin = 0.0;
  for (const Mode& m : fs.modes())
    if (m.in_ball) kin += fs.momentum2(m.k);
  double L3 = fs.L() * fs.L() * fs.L();
  return kin + v.at_zero() * fs.rho(0) * fs.rho(1) * L3;
}

Op particle_hole(const FockSpace& fs) {
  const auto& modes = fs.modes();
  const std::size_t M = fs.size();
  std::vector<int> perm(M);
  std::uint64_t in_mask = fs.ffg_bits();
  int n_in = popcount(in_mask);
  for (std::size_t j = 0; j < M; ++j) {
    perm[j] = static_cast<int>(j);
    if (!modes[j].in_ball) continue;
    IVec3 mk{-modes[j].k[0], -modes[j].k[1], -modes[j].k[2]};
    int i = fs.index(modes[j].spin, mk);
    if (i < 0 || !modes[static_cast<std::size_t>(i)].in_ball)
      throw InputError("selected Fermi-ball modes must be closed under k -> -k");
    perm[j] = i;
  }
  // U |b> = a*_{pi(j1)} ... a*_{pi(jm)} Omega, combined with the diagonal
  // (-1)^{n_in N} (-1)^{N_in} that fixes the signs of the conjugation law.
  std::vector<Eigen::Triplet<double>> trip;
  for (std::uint64_t b = 0; b < fs.dim(); ++b) {
    std::vector<int> img;
    for (std::size_t j = 0; j < M; ++j)
      if (b & (std::uint64_t{1} << j)) img.push_back(perm[j]);
    int inv = 0;
    for (std::size_t x = 0; x < img.size(); ++x)
      for (std::size_t y = x + 1; y < img.size(); ++y) inv += img[x] > img[y];
    std::uint64_t nb = 0;
    for (int j : img) nb |= std::uint64_t{1} << j;
    int parity = inv + n_in * popcount(b) + popcount(b & in_mask);
    trip.emplace_back(static_cast<int>(nb), static_cast<int>(b), (parity & 1) ? -1.0 : 1.0);
  }
  Op UD(static_cast<long>(fs.dim()), static_cast<long>(fs.dim()));
  UD.setFromTriplets(trip.begin(), trip.end());
  Op R = fs.identity();
  for (std::size_t j = 0; j < M; ++j) {
    if (!modes[j].in_ball) continue;
    Op F = fs.annihilate(static_cast<int>(j)) + fs.create(static_cast<int>(j));
    R = Op(R * F);
  }
  return Op(R * UD);
}

double omega_eps(const FockSpace& fs, const TransferKernel& w, const IVec3& r, const IVec3& rp, const IVec3& p,
                 double eps) {
  IVec3 rpp{r[0] + p[0], r[1] + p[1], r[2] + p[2]};
  IVec3 rpm{rp[0] - p[0], rp[1] - p[1], rp[2] - p[2]};
  double lam = fs.momentum2(rpp) - fs.momentum2(r);
  double lamp = fs.momentum2(rpm) - fs.momentum2(rp);
  double den = lam + lamp + 2.0 * eps;
  if (!(den > 0.0)) throw DomainError("nonpositive Bethe-Goldstone denominator");
  return w(p) / den;
}

double op_norm(const Op& a) { return a.norm(); }

Eigen::MatrixXd to_dense(const Op& a) {
  if (a.rows() > 4096) throw ResourceError("dense conversion limited to dim 4096");
  return Eigen::MatrixXd(a);
}

}  // namespace hyk
