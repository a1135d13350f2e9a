#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "echolab/linalg.hpp"

namespace echolab {

// Seedable, splittable random source. Each (seed, stream_index) pair seeds a
// 64-bit Mersenne Twister through std::seed_seq; normals come from our own
// Box-Muller transform because std::normal_distribution is not specified
// bit-for-bit across standard libraries.
class RngStream {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64/seed_seq(seed,stream)/box-muller/v1";

  RngStream(std::uint64_t seed, std::uint64_t stream_index);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_index() const { return stream_; }

  std::uint64_t next_u64() { return engine_(); }
  double uniform();  // [0, 1)
  double normal();   // N(0, 1)
  int sign();        // +1 or -1 with probability 1/2

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

struct NoiseRealization {
  std::vector<int> signs;
  double delta = 0.0;
  HermitianOperator op;
};

// (G + G^dagger)/sqrt(2) with G having independent N(0,1) real and imaginary parts.
HermitianOperator sample_gue(Index d, RngStream& rng);

// GUE draw rescaled so that hs_inner(A, A) = d.
HermitianOperator sample_random_hermitian(Index d, RngStream& rng);

// Ginibre QR with the diagonal of R absorbed into Q.
ComplexMatrix sample_haar_unitary(Index d, RngStream& rng);

// Exact Haar average of (U^dagger (x) I) O (U (x) I) over U on the chosen factor.
ComplexMatrix haar_average_conjugation(const ComplexMatrix& o, const BipartitePartition& part,
                                       Subsystem over);

NoiseRealization noise_operator_from_signs(const std::vector<HermitianOperator>& couplings,
                                           double delta, const std::vector<int>& signs);

NoiseRealization sample_noise_operator(const std::vector<HermitianOperator>& couplings,
                                       double delta, RngStream& rng);

}  // namespace echolab
