#pragma once

#include <Eigen/Sparse>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hyk/lattice.hpp"
#include "hyk/scattering.hpp"

namespace hyk {

using Op = Eigen::SparseMatrix<double>;

struct Mode {
  int spin = 0;  // 0 = up, 1 = down
  IVec3 k{};
  bool in_ball = false;
};

// Fermionic Fock space over a small set of lattice modes. Jordan-Wigner signs
// follow the mode order: spin first, then lexicographic k. Bit j of a basis
// index is the occupation of mode j.
class FockSpace {
 public:
  static constexpr std::size_t kMaxModes = 16;

  FockSpace(const MomentumLattice& lat, std::vector<std::pair<int, IVec3>> selected);

  std::size_t size() const { return modes_.size(); }
  std::size_t dim() const { return std::size_t{1} << modes_.size(); }
  const std::vector<Mode>& modes() const { return modes_; }
  int index(int spin, const IVec3& k) const;  // -1 if not selected
  double L() const { return L_; }
  double unit() const { return unit_; }
  double k_f(int spin) const { return k_f_[static_cast<std::size_t>(spin)]; }
  double momentum2(const IVec3& k) const;  // |unit k|^2
  // Selected in-ball modes of this spin over L^3.
  double rho(int spin) const;

  bool selected_out(int spin, const IVec3& k) const;  // u-hat on the selected set
  bool selected_in(int spin, const IVec3& k) const;   // v-hat on the selected set

  Op annihilate(int j) const;
  Op create(int j) const;
  Op identity() const;
  Op number(int spin) const;
  Op number_ball(int spin, bool inside) const;
  Eigen::VectorXd basis_state(std::uint64_t bits) const;
  std::uint64_t ffg_bits() const;  // every in-ball mode occupied

 private:
  std::vector<Mode> modes_;
  double L_ = 0.0, unit_ = 0.0;
  std::array<double, 2> k_f_{};
};

struct Letter {
  int mode = 0;
  bool dagger = false;
};

// Collects c * (product of letters) terms; the rightmost letter acts first.
class OpBuilder {
 public:
  explicit OpBuilder(const FockSpace& fs) : fs_(&fs) {}
  void add(double c, const std::vector<Letter>& word);
  void add_identity(double c);
  Op build() const;

 private:
  const FockSpace* fs_;
  std::vector<Eigen::Triplet<double>> trip_;
};

// Fourier coefficients g-hat(unit k) tabulated per shell |k|^2 <= n_max.
// Lookups beyond the table are input errors, never zero.
struct TransferKernel {
  std::string name;
  double unit = 0.0;
  long n_max = 0;
  std::vector<double> shell;
  double operator()(const IVec3& k) const;
  double at_zero() const { return shell.at(0); }
};

struct KernelSet {
  TransferKernel v, vphi, vphi2, vf, w;  // w = 2 |p|^2 phi-hat(p), w(0) = 0
};

KernelSet make_kernels(const ScatteringSolution& sol, double L, long n_max);
TransferKernel scaled_kernel(const TransferKernel& g, double s, const std::string& name);

enum class Filter { u, v, all };

struct Field {
  int point = 0;  // 0 = x, 1 = y
  int spin = 0;
  Filter filter = Filter::all;
  bool dagger = false;
};

// coeff * int dx dy g(x - y) F_1 ... F_n with a(w_x) = L^(-3/2) sum_k w(k) e^{ikx} a_k.
void add_pair_integral(OpBuilder& b, const FockSpace& fs, const TransferKernel& g, const std::vector<Field>& f,
                       double coeff);
// coeff * int dx F_1 ... F_n, every field at the same point.
void add_point_integral(OpBuilder& b, const FockSpace& fs, const std::vector<Field>& f, double coeff);

// Correlation Hamiltonian pieces for interaction kernel g.
struct CorrelationTerms {
  Op h0, q2, q3, q4;
  std::array<Op, 4> e_corr;
  Op total() const;
};

CorrelationTerms build_correlation_terms(const FockSpace& fs, const TransferKernel& g);
Op q2_term(const FockSpace& fs, const TransferKernel& g);
Op q3_term(const FockSpace& fs, const TransferKernel& g);
Op q4_term(const FockSpace& fs, const TransferKernel& g);

// Kinetic energy plus the full pair interaction over the selected modes.
Op hamiltonian(const FockSpace& fs, const TransferKernel& v);
Op equal_spin_interaction(const FockSpace& fs, const TransferKernel& v);
// sum of |k|^2 over the balls plus V(0) N_up N_down / L^3.
double ffg_constant(const FockSpace& fs, const TransferKernel& v);

// Particle-hole unitary: R Omega = Psi_FFG, R* a*_k R = a*_k outside the
// balls and a_{-k} inside. Needs the selected ball modes closed under k -> -k.
Op particle_hole(const FockSpace& fs);

// Bethe-Goldstone kernel omega^eps_{r,r'}(p) on integer momenta.
double omega_eps(const FockSpace& fs, const TransferKernel& w, const IVec3& r, const IVec3& rp, const IVec3& p,
                 double eps);

double op_norm(const Op& a);  // Frobenius
Eigen::MatrixXd to_dense(const Op& a);

}  // namespace hyk
