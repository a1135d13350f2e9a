#include "echolab/models.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

#include "echolab/error.hpp"

namespace echolab {

std::vector<HermitianOperator> pauli_operators() {
  const Complex i(0.0, 1.0);
  ComplexMatrix id = ComplexMatrix::Identity(2, 2);
  ComplexMatrix x(2, 2), y(2, 2), z(2, 2);
  x << 0, 1, 1, 0;
  y << 0, -i, i, 0;
  z << 1, 0, 0, -1;
  return {HermitianOperator(id), HermitianOperator(x), HermitianOperator(y), HermitianOperator(z)};
}

HermitianOperator assemble_bipartite(const BipartitePartition& part, const HermitianOperator& h_a,
                                     const HermitianOperator& h_b,
                                     const std::vector<HermitianOperator>& couplings_a,
                                     const std::vector<HermitianOperator>& couplings_b,
                                     double delta) {
  if (h_a.dim() != part.d_a || h_b.dim() != part.d_b)
    throw InvalidArgument("assemble_bipartite: local Hamiltonian dimensions do not match partition");
  if (couplings_a.size() != couplings_b.size())
    throw InvalidArgument("assemble_bipartite: coupling lists differ in length");
  ComplexMatrix h = embed(h_b.matrix(), part, Subsystem::B) + embed(h_a.matrix(), part, Subsystem::A);
  for (std::size_t k = 0; k < couplings_a.size(); ++k)
    h += delta * kron(couplings_a[k].matrix(), couplings_b[k].matrix());
  return HermitianOperator(h);
}

BipartiteModel build_bipartite(Index d_b, double delta, RngStream& rng) {
  if (d_b < 2) throw InvalidArgument("build_bipartite: d_B must be at least 2");
  if (!(delta >= 0.0) || !std::isfinite(delta))
    throw InvalidArgument("build_bipartite: delta must be finite and nonnegative");
  BipartiteModel m;
  m.part = BipartitePartition(2, d_b);
  m.delta = delta;
  m.couplings_a = pauli_operators();
  m.h_a = sample_gue(2, rng);
  m.h_b = sample_gue(d_b, rng);
  const double norm_hb = std::sqrt(hs_inner(m.h_b.matrix(), m.h_b.matrix()).real());
  for (std::size_t k = 0; k < m.couplings_a.size(); ++k) {
    HermitianOperator v = sample_gue(d_b, rng);
    const double norm_v = std::sqrt(hs_inner(v.matrix(), v.matrix()).real());
    m.couplings_b.push_back(v.scaled(norm_hb / norm_v));
  }
  m.h_total = assemble_bipartite(m.part, m.h_a, m.h_b, m.couplings_a, m.couplings_b, delta);
  return m;
}

EchoNoiseModel echo_noise_model(const BipartiteModel& model, NoiseChannels channels) {
  EchoNoiseModel out{model.h_b, {}};
  if (channels == NoiseChannels::All) {
    out.couplings = model.couplings_b;
    return out;
  }
  const double da = static_cast<double>(model.part.d_a);
  ComplexMatrix h = model.h_b.matrix();
  for (std::size_t k = 0; k < model.couplings_a.size(); ++k) {
    const ComplexMatrix& va = model.couplings_a[k].matrix();
    const Complex t = va.trace() / da;
    const ComplexMatrix traceless = va - t * ComplexMatrix::Identity(va.rows(), va.cols());
    h += model.delta * t.real() * model.couplings_b[k].matrix();
    if (max_abs(traceless) > 1e-12) out.couplings.push_back(model.couplings_b[k]);
  }
  out.h_b = HermitianOperator(h);
  if (out.couplings.empty())
    throw InvalidArgument("echo_noise_model: no coupling channel acts nontrivially on A");
  return out;
}

FockSectors::FockSectors(int n_modes) : n_(n_modes) {
  if (n_modes < 1 || n_modes > kMaxDenseFermions) {
    std::ostringstream os;
    os << "FockSectors: mode count " << n_modes << " outside [1, " << kMaxDenseFermions << "]";
    throw InvalidArgument(os.str());
  }
  const std::uint32_t dim = 1u << n_modes;
  states_.assign(n_modes + 1, {});
  index_.assign(dim, 0);
  for (std::uint32_t s = 0; s < dim; ++s) {
    auto& sector = states_[std::popcount(s)];
    index_[s] = static_cast<Index>(sector.size());
    sector.push_back(s);
  }
}

int FockSectors::jw_sign(std::uint32_t state, int site) const {
  // Sites before `site` occupy the bits above bit(site).
  const std::uint32_t above = state >> (n_ - site);
  return (std::popcount(above) & 1) ? -1 : 1;
}

std::pair<ComplexMatrix, ComplexMatrix> jordan_wigner(int n, int site) {
  if (n < 1 || n > kMaxDenseFermions)
    throw InvalidArgument("jordan_wigner: N must lie in [1, 14] for dense storage");
  if (site < 0 || site >= n) throw InvalidArgument("jordan_wigner: site out of range");
  const FockSectors basis(n);
  const Index dim = Index{1} << n;
  ComplexMatrix c = ComplexMatrix::Zero(dim, dim);
  const std::uint32_t b = basis.bit(site);
  for (std::uint32_t s = 0; s < static_cast<std::uint32_t>(dim); ++s)
    if (s & b) c(s ^ b, s) = static_cast<double>(basis.jw_sign(s, site));
  ComplexMatrix cdag = c.adjoint();
  return {std::move(c), std::move(cdag)};
}

std::vector<ComplexMatrix> annihilator_blocks(const FockSectors& sectors, int site) {
  const int n = sectors.n_modes();
  if (site < 0 || site >= n) throw InvalidArgument("annihilator_blocks: site out of range");
  const std::uint32_t b = sectors.bit(site);
  std::vector<ComplexMatrix> blocks;
  for (int sec = 0; sec < n; ++sec) {
    ComplexMatrix c = ComplexMatrix::Zero(sectors.sector_dim(sec), sectors.sector_dim(sec + 1));
    const auto& from = sectors.states(sec + 1);
    for (std::size_t col = 0; col < from.size(); ++col) {
      const std::uint32_t s = from[col];
      if (s & b)
        c(sectors.index_in_sector(s ^ b), static_cast<Index>(col)) =
            static_cast<double>(sectors.jw_sign(s, site));
    }
    blocks.push_back(std::move(c));
  }
  return blocks;
}

Index SykModel::pair_index(int i, int j, int n) {
  // Lexicographic rank of (i, j) with i < j.
  return static_cast<Index>(i) * (2 * n - i - 1) / 2 + (j - i - 1);
}

SykModel::SykModel(int n, double variance_scale, std::pair<int, int> probes,
                   ComplexMatrix pair_couplings)
    : n_(n),
      variance_scale_(variance_scale),
      probes_(probes),
      pair_couplings_(std::move(pair_couplings)),
      sectors_(n) {}

Complex SykModel::undeformed_coupling(int i, int j, int k, int l) const {
  for (int s : {i, j, k, l})
    if (s < 0 || s >= n_) throw InvalidArgument("SykModel::coupling: site out of range");
  if (i == j || k == l) return 0.0;
  double sign = 1.0;
  if (i > j) std::swap(i, j), sign = -sign;
  if (k > l) std::swap(k, l), sign = -sign;
  return sign * pair_couplings_(pair_index(i, j, n_), pair_index(k, l, n_));
}

double SykModel::deformation_factor(int i, int j, int k, int l) const {
  for (int s : {i, j, k, l})
    if (s == probes_.first || s == probes_.second) return g_;
  return 1.0;
}

Complex SykModel::coupling(int i, int j, int k, int l) const {
  return deformation_factor(i, j, k, l) * undeformed_coupling(i, j, k, l);
}

void SykModel::assemble(double g) {
  g_ = g;
  const double prefactor = 4.0 / std::pow(2.0 * n_, 1.5);
  blocks_.clear();
  for (int sec = 0; sec <= n_; ++sec) {
    const auto& states = sectors_.states(sec);
    const Index dim = static_cast<Index>(states.size());
    ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
    for (Index col = 0; col < dim; ++col) {
      const std::uint32_t s = states[col];
      // c_i^dagger c_j^dagger c_k c_l |s>, applied right to left.
      for (int k = 0; k < n_; ++k) {
        if (!(s & sectors_.bit(k))) continue;
        for (int l = k + 1; l < n_; ++l) {
          if (!(s & sectors_.bit(l))) continue;
          const std::uint32_t s1 = s ^ sectors_.bit(l);
          const int sign1 = sectors_.jw_sign(s, l);
          const std::uint32_t s2 = s1 ^ sectors_.bit(k);
          const int sign2 = sign1 * sectors_.jw_sign(s1, k);
          const Index q = pair_index(k, l, n_);
          for (int i = 0; i < n_; ++i) {
            if (s2 & sectors_.bit(i)) continue;
            for (int j = i + 1; j < n_; ++j) {
              if (s2 & sectors_.bit(j)) continue;
              const std::uint32_t s3 = s2 | sectors_.bit(j);
              const int sign3 = sign2 * sectors_.jw_sign(s2, j);
              const std::uint32_t s4 = s3 | sectors_.bit(i);
              const int sign4 = sign3 * sectors_.jw_sign(s3, i);
              const double f = deformation_factor(i, j, k, l);
              h(sectors_.index_in_sector(s4), col) +=
                  (prefactor * f * sign4) * pair_couplings_(pair_index(i, j, n_), q);
            }
          }
        }
      }
    }
    blocks_.push_back(0.5 * (h + h.adjoint()));
  }
}

ComplexMatrix SykModel::dense_hamiltonian() const {
  const Index dim = Index{1} << n_;
  ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
  for (int sec = 0; sec <= n_; ++sec) {
    const auto& states = sectors_.states(sec);
    for (std::size_t c = 0; c < states.size(); ++c)
      for (std::size_t r = 0; r < states.size(); ++r)
        h(states[r], states[c]) = blocks_[sec](static_cast<Index>(r), static_cast<Index>(c));
  }
  return h;
}

namespace {

void validate_syk(int n, double variance_scale, double g, std::pair<int, int> probes) {
  if (n < 4 || n > kMaxDenseFermions)
    throw InvalidArgument("build_syk: N must lie in [4, 14]");
  if (!(variance_scale > 0.0) || !std::isfinite(variance_scale))
    throw InvalidArgument("build_syk: variance_scale must be positive");
  if (!(g > 0.0 && g <= 1.0)) throw InvalidArgument("SYK deformation g must lie in (0, 1]");
  if (probes.first == probes.second || probes.first < 0 || probes.second < 0 ||
      probes.first >= n || probes.second >= n)
    throw InvalidArgument("build_syk: probe sites must be distinct and within [0, N)");
}

}  // namespace

SykModel build_syk(int n, double variance_scale, double g, std::pair<int, int> probe_sites,
                   RngStream& rng) {
  validate_syk(n, variance_scale, g, probe_sites);
  const Index np = static_cast<Index>(n) * (n - 1) / 2;
  ComplexMatrix j(np, np);
  const double sigma = std::sqrt(variance_scale);
  const double sigma_half = std::sqrt(variance_scale / 2.0);
  for (Index p = 0; p < np; ++p) {
    j(p, p) = sigma * rng.normal();
    for (Index q = p + 1; q < np; ++q) {
      const double re = rng.normal();
      const double im = rng.normal();
      j(p, q) = sigma_half * Complex(re, im);
      j(q, p) = std::conj(j(p, q));
    }
  }
  SykModel model(n, variance_scale, probe_sites, std::move(j));
  model.assemble(g);
  return model;
}

SykModel deform_syk(const SykModel& model, double g) {
  validate_syk(model.n_fermions(), model.variance_scale(), g, model.probe_sites());
  SykModel out = model;
  out.assemble(g);
  return out;
}

RealVector SykSpectrum::all_energies() const {
  Index total = 0;
  for (const auto& e : energies) total += e.size();
  RealVector out(total);
  Index pos = 0;
  for (const auto& e : energies) {
    out.segment(pos, e.size()) = e;
    pos += e.size();
  }
  std::sort(out.data(), out.data() + out.size());
  return out;
}

SykSpectrum diagonalize(const SykModel& model) {
  SykSpectrum spec;
  for (const auto& block : model.sector_blocks()) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(block, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) throw NumericalError("SYK sector diagonalization failed");
    spec.energies.push_back(solver.eigenvalues());
    spec.vectors.push_back(solver.eigenvectors());
  }
  return spec;
}

double spectral_width(const RealVector& energies) {
  if (energies.size() == 0) throw InvalidArgument("spectral_width: empty spectrum");
  const double mean = energies.mean();
  return std::sqrt((energies.array() - mean).square().mean());
}

}  // namespace echolab
