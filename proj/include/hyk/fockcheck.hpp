#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hyk/fock.hpp"

namespace hyk {

// Max-abs residual of {a_i, a*_j} = delta_ij and {a_i, a_j} = 0 over all pairs.
double car_residual(const FockSpace& fs);

struct ParticleHoleReport {
  double vacuum = 0.0;       // ||R Omega - Psi_FFG||
  double unitarity = 0.0;    // max-abs of R^T R - 1
  double conjugation = 0.0;  // max over modes of max-abs(R* a*_k R - expected)
};

ParticleHoleReport particle_hole_report(const FockSpace& fs);

// max over spins of ||(N_in - N_out) psi|| and ||(N_in - N_sigma / 2) psi||.
double particle_hole_relation_residual(const FockSpace& fs, const Eigen::VectorXd& psi);

// Random normalized state in the (n_up, n_down) sector.
Eigen::VectorXd random_sector_state(const FockSpace& fs, int n_up, int n_down, std::uint64_t seed);

struct VphiIdentity {
  double global = 0.0;        // pre-cancellation identity, relative to operand norms
  double dec1 = 0.0;          // 1/2 int V T* A + h.c. = Q2|Vphi
  double dec2 = 0.0;          // 1/2 int V S* A + h.c. = Q3|Vphi
  double dec3 = 0.0;          // normal order of 1/2 int V |T|^2
  double dec4 = 0.0;          // normal order of 1/2 int V |S|^2
  double dec5 = 0.0;          // 1/2 int V T* S = E_TS
  double subspace = 0.0;      // P (N^v - N^u) P on the particle-hole subspace
  double projector = 0.0;     // P vs R* P_N R
  double lhs_norm = 0.0;
};

VphiIdentity verify_vphi_square_identity(const FockSpace& fs, const KernelSet& k);

struct TTTuple {
  IVec3 p{}, q{}, r{}, rp{}, s{};
  int sigma = 0;  // sigma' = 1 - sigma
};

bool tt_admissible(const MomentumLattice& lat, const TTTuple& t);
// Random admissible tuples; every fifth one has p = q, r' = s.
std::vector<TTTuple> sample_tt_tuples(const MomentumLattice& lat, int count, std::uint64_t seed);
// Max-abs residual of the six-operator anticommutator on the modes of the tuple.
double verify_tt_anticommutator(const MomentumLattice& lat, const TTTuple& t);

struct RRReport {
  double residual = 0.0;  // relative
  double lhs_norm = 0.0;
  std::array<double, 10> min_eig{}, max_eig{}, asym{};
  std::array<double, 10> norm{};
};

// T*_sigma(r) of the renormalization for Q2 with kernel omega^eps.
Op t_star(const FockSpace& fs, const TransferKernel& w, int sigma, const IVec3& r, double eps);
std::array<Op, 10> rr_terms(const FockSpace& fs, const TransferKernel& w, double eps);
RRReport verify_rr_decomposition(const FockSpace& fs, const TransferKernel& w, double eps);

struct ConjugationReport {
  double min_gap = 0.0;           // min over trials of <H> - E_FFG - <H_corr>
  double max_identity_gap = 0.0;  // max |gap - <equal-spin interaction>|
  double ffg_gap = 0.0;           // gap at Psi_FFG
  double ffg_equal_spin = 0.0;
  int trials = 0;
};

ConjugationReport conjugation_lower_bound_check(const FockSpace& fs, const TransferKernel& v, int trials,
                                                std::uint64_t seed);

struct SectorSpectrum {
  int n_up = 0, n_down = 0;
  std::vector<double> lowest;
};

// Lowest eigenvalues per (N_up, N_down) sector; H must be symmetric.
std::vector<SectorSpectrum> tiny_ed(const FockSpace& fs, const Op& H, int per_sector = 3);

// Commutator norms ||[H, N_sigma]||.
std::array<double, 2> number_conservation(const FockSpace& fs, const Op& H);

struct FockPreset {
  std::string name;
  double L = 0.0;
  double kf = 0.0;  // both spins
  double v0 = 0.0, range = 0.0;  // square well
  double eps = 0.0;
  std::vector<std::pair<int, IVec3>> modes;
};

FockPreset fock_preset(const std::string& name);
std::vector<std::string> fock_preset_names();

struct CheckResult {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

// Runs the named checks (car, particle-hole, relation, vphi, tt, rr, signs,
// conjugation, number, ed) on a preset. Empty list = all.
std::vector<CheckResult> run_fock_checks(const FockPreset& preset, const std::vector<std::string>& checks,
                                         std::uint64_t seed, const std::string& kernel = "v");

}  // namespace hyk
