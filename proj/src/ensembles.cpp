#include "echolab/ensembles.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "echolab/error.hpp"

namespace echolab {

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_index)
    : seed_(seed), stream_(stream_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_index),
                    static_cast<std::uint32_t>(stream_index >> 32)};
  engine_.seed(seq);
}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_normal_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(theta);
  has_cached_ = true;
  return r * std::cos(theta);
}

int RngStream::sign() { return (engine_() >> 63) ? 1 : -1; }

namespace {

void require_dim(Index d, const char* what) {
  if (d < 1) throw InvalidArgument(std::string(what) + ": dimension must be at least 1");
}

ComplexMatrix ginibre(Index d, RngStream& rng) {
  ComplexMatrix g(d, d);
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < d; ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      g(i, j) = Complex(re, im);
    }
  return g;
}

}  // namespace

HermitianOperator sample_gue(Index d, RngStream& rng) {
  require_dim(d, "sample_gue");
  const ComplexMatrix g = ginibre(d, rng);
  return HermitianOperator((g + g.adjoint()) / std::numbers::sqrt2);
}

HermitianOperator sample_random_hermitian(Index d, RngStream& rng) {
  require_dim(d, "sample_random_hermitian");
  HermitianOperator h = sample_gue(d, rng);
  const double norm2 = hs_inner(h.matrix(), h.matrix()).real();
  return h.scaled(std::sqrt(static_cast<double>(d) / norm2));
}

ComplexMatrix sample_haar_unitary(Index d, RngStream& rng) {
  require_dim(d, "sample_haar_unitary");
  const ComplexMatrix z = ginibre(d, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(d, d);
  const auto& r = qr.matrixQR();
  for (Index j = 0; j < d; ++j) {
    const Complex rjj = r(j, j);
    const double mag = std::abs(rjj);
    if (mag > 0.0) q.col(j) *= rjj / mag;
  }
  return q;
}

ComplexMatrix haar_average_conjugation(const ComplexMatrix& o, const BipartitePartition& part,
                                       Subsystem over) {
  const ComplexMatrix reduced = partial_trace(o, part, over);
  if (over == Subsystem::A)
    return kron(ComplexMatrix::Identity(part.d_a, part.d_a), reduced) /
           static_cast<double>(part.d_a);
  return kron(reduced, ComplexMatrix::Identity(part.d_b, part.d_b)) /
         static_cast<double>(part.d_b);
}

NoiseRealization noise_operator_from_signs(const std::vector<HermitianOperator>& couplings,
                                           double delta, const std::vector<int>& signs) {
  if (couplings.empty()) throw InvalidArgument("noise operator: coupling list is empty");
  if (signs.size() != couplings.size())
    throw InvalidArgument("noise operator: sign count does not match coupling count");
  if (!(delta >= 0.0) || !std::isfinite(delta))
    throw InvalidArgument("noise operator: delta must be finite and nonnegative");
  const Index d = couplings.front().dim();
  ComplexMatrix sum = ComplexMatrix::Zero(d, d);
  for (std::size_t k = 0; k < couplings.size(); ++k) {
    if (couplings[k].dim() != d) {
      std::ostringstream os;
      os << "noise operator: coupling " << k << " has dimension " << couplings[k].dim()
         << ", expected " << d;
      throw InvalidArgument(os.str());
    }
    if (signs[k] != 1 && signs[k] != -1) throw InvalidArgument("noise operator: signs must be +-1");
    sum += static_cast<double>(signs[k]) * couplings[k].matrix();
  }
  return NoiseRealization{signs, delta, HermitianOperator(delta * sum)};
}

NoiseRealization sample_noise_operator(const std::vector<HermitianOperator>& couplings,
                                       double delta, RngStream& rng) {
  if (couplings.empty()) throw InvalidArgument("sample_noise_operator: coupling list is empty");
  std::vector<int> signs(couplings.size());
  for (auto& s : signs) s = rng.sign();
  return noise_operator_from_signs(couplings, delta, signs);
}

}  // namespace echolab
