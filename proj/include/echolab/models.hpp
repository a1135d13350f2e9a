#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "echolab/ensembles.hpp"
#include "echolab/linalg.hpp"

namespace echolab {

// H = I (x) H_B + H_A (x) I + delta sum_k V_A^k (x) V_B^k.
struct BipartiteModel {
  BipartitePartition part;
  HermitianOperator h_a;
  HermitianOperator h_b;
  std::vector<HermitianOperator> couplings_a;
  std::vector<HermitianOperator> couplings_b;
  double delta = 0.0;
  HermitianOperator h_total;
};

// {I, sigma_x, sigma_y, sigma_z}.
std::vector<HermitianOperator> pauli_operators();

HermitianOperator assemble_bipartite(const BipartitePartition& part, const HermitianOperator& h_a,
                                     const HermitianOperator& h_b,
                                     const std::vector<HermitianOperator>& couplings_a,
                                     const std::vector<HermitianOperator>& couplings_b,
                                     double delta);

// d_A = 2 with Pauli couplings on A; H_A, H_B and every V_B^k are GUE draws,
// each V_B^k rescaled to the Hilbert-Schmidt norm of H_B.
BipartiteModel build_bipartite(Index d_b, double delta, RngStream& rng);

// How the bath-side couplings become echo perturbations.
//   traceless: a channel whose V_A^k is proportional to the identity cannot
//              dephase A, so delta Tr(V_A^k)/d_A V_B^k is folded into H_B and
//              only the remaining channels carry random signs.
//   all:       every V_B^k carries a random sign.
enum class NoiseChannels { Traceless, All };

struct EchoNoiseModel {
  HermitianOperator h_b;
  std::vector<HermitianOperator> couplings;
};

EchoNoiseModel echo_noise_model(const BipartiteModel& model, NoiseChannels channels);

// Particle-number sectors of the 2^N Fock space. A basis state is a bitmask
// whose value equals its index in the dense Jordan-Wigner basis: site i is
// bit N-1-i, so site 0 is the leftmost tensor factor.
class FockSectors {
 public:
  explicit FockSectors(int n_modes);

  int n_modes() const { return n_; }
  int n_sectors() const { return n_ + 1; }
  const std::vector<std::uint32_t>& states(int sector) const { return states_[sector]; }
  Index sector_dim(int sector) const { return static_cast<Index>(states_[sector].size()); }
  Index index_in_sector(std::uint32_t state) const { return index_[state]; }

  std::uint32_t bit(int site) const { return 1u << (n_ - 1 - site); }
  // (-1)^(number of occupied sites before `site`).
  int jw_sign(std::uint32_t state, int site) const;

 private:
  int n_;
  std::vector<std::vector<std::uint32_t>> states_;
  std::vector<Index> index_;
};

inline constexpr int kMaxDenseFermions = 14;

// Annihilator and creator of one site in the dense 2^N basis.
std::pair<ComplexMatrix, ComplexMatrix> jordan_wigner(int n, int site);

// c_site restricted to sector n+1 -> n, for n = 0..N-1, in the occupation basis.
std::vector<ComplexMatrix> annihilator_blocks(const FockSectors& sectors, int site);

class SykModel {
 public:
  int n_fermions() const { return n_; }
  double variance_scale() const { return variance_scale_; }
  double g() const { return g_; }
  std::pair<int, int> probe_sites() const { return probes_; }

  // Undeformed draws J_{(i<j);(k<l)} as a Hermitian matrix over ordered pairs.
  const ComplexMatrix& pair_couplings() const { return pair_couplings_; }
  static Index pair_index(int i, int j, int n);

  Complex undeformed_coupling(int i, int j, int k, int l) const;
  // Includes the factor g on couplings that touch a probe site.
  Complex coupling(int i, int j, int k, int l) const;
  double deformation_factor(int i, int j, int k, int l) const;

  const FockSectors& sectors() const { return sectors_; }
  // Hamiltonian restricted to each particle-number sector.
  const std::vector<ComplexMatrix>& sector_blocks() const { return blocks_; }
  ComplexMatrix dense_hamiltonian() const;
  HermitianOperator h_total() const { return HermitianOperator(dense_hamiltonian()); }

 private:
  friend SykModel build_syk(int, double, double, std::pair<int, int>, RngStream&);
  friend SykModel deform_syk(const SykModel&, double);
  SykModel(int n, double variance_scale, std::pair<int, int> probes, ComplexMatrix pair_couplings);
  void assemble(double g);

  int n_ = 0;
  double variance_scale_ = 1.0;
  double g_ = 1.0;
  std::pair<int, int> probes_{0, 1};
  ComplexMatrix pair_couplings_;
  FockSectors sectors_;
  std::vector<ComplexMatrix> blocks_;
};

SykModel build_syk(int n, double variance_scale, double g, std::pair<int, int> probe_sites,
                   RngStream& rng);
SykModel deform_syk(const SykModel& model, double g);

// Per-sector eigendecomposition of an SYK Hamiltonian.
struct SykSpectrum {
  std::vector<RealVector> energies;
  std::vector<ComplexMatrix> vectors;
  RealVector all_energies() const;
};

SykSpectrum diagonalize(const SykModel& model);

// Root-mean-square width of a spectrum, sqrt(<E^2> - <E>^2) with equal weights.
double spectral_width(const RealVector& energies);

}  // namespace echolab
