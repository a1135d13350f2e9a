#pragma once

#include <string>
#include <vector>

#include "echolab/ensembles.hpp"
#include "echolab/linalg.hpp"
#include "echolab/models.hpp"

namespace echolab {

class TimeGrid {
 public:
  TimeGrid() = default;
  // Strictly ascending, nonnegative; must start at 0 unless allow_offset is set.
  explicit TimeGrid(std::vector<double> times, bool allow_offset = false);
  static TimeGrid uniform(double t_max, int n_points);

  const std::vector<double>& times() const { return times_; }
  std::size_t size() const { return times_.size(); }
  double operator[](std::size_t i) const { return times_[i]; }

 private:
  std::vector<double> times_;
};

struct DecayCurve {
  TimeGrid grid;
  std::vector<double> mean;
  std::vector<double> std_error;
  // Values before division by `normalization`; equal to mean when not normalized.
  std::vector<double> raw_mean;
  double normalization = 1.0;
  bool normalized = false;
  int n_realizations = 1;
  std::string label;
  // Largest imaginary part discarded when taking real parts of traces.
  double max_imag_residue = 0.0;

  void validate() const;
  DecayCurve complement() const;  // 1 - mean, same errors
};

// Divides by the t = 0 value; rejects a zero start value.
DecayCurve normalize_curve(DecayCurve curve);

// Ensemble mean and standard error of realization curves, reduced in index order.
DecayCurve average_curves(const std::vector<DecayCurve>& curves, const std::string& label);

enum class Regularization { ThermalCircle, Unregularized, PureState };

struct OtocOptions {
  Regularization regularization = Regularization::ThermalCircle;
  ComplexVector state;  // used by PureState
  bool normalize = true;
};

inline constexpr double kImagResidueTolerance = 1e-8;

// F(t) = Tr[y A^dagger(t) y B^dagger y A(t) y B] with y = (e^{-beta H}/Z)^{1/4}.
// A and B are full-dimension operators. The value is real for Hermitian A, B on the
// thermal circle; in the other cases Re F is returned and the dropped imaginary
// part is recorded in max_imag_residue.
DecayCurve otoc_regularized(const EigenDecomposition& hdec, const ComplexMatrix& a,
                            const ComplexMatrix& b, double beta, const TimeGrid& grid,
                            const OtocOptions& options);
DecayCurve otoc_regularized(const EigenDecomposition& hdec, const ComplexMatrix& a,
                            const ComplexMatrix& b, double beta, const TimeGrid& grid,
                            bool normalize);

// Exact Haar average over A on S_A of the regularized OTOC for a fixed local B.
DecayCurve otoc_haar_exact_A(const EigenDecomposition& hdec, const ComplexMatrix& b_local,
                             const BipartitePartition& part, double beta, const TimeGrid& grid,
                             bool normalize = false);

// Exact Haar average over both A and B of the regularized OTOC, at complex time z.
Complex otoc_haar_average_at(const EigenDecomposition& hdec, const BipartitePartition& part,
                             double beta, Complex z);
DecayCurve otoc_haar_average(const EigenDecomposition& hdec, const BipartitePartition& part,
                             double beta, const TimeGrid& grid, bool normalize);

// Monte Carlo over independent Haar draws of A (on S_A) and B (on S_B).
// With normalization the ratio to the t = 0 sample mean is returned, with
// delta-method standard errors.
DecayCurve otoc_haar_mc(const EigenDecomposition& hdec, const BipartitePartition& part,
                        double beta, const TimeGrid& grid, int n_samples, RngStream& rng,
                        const OtocOptions& options = {});

// |<e^{i(H+V1)t} e^{-i(H+V2)t}>_beta|^2 with the normalized thermal state of H.
DecayCurve loschmidt_echo(const HermitianOperator& h, const HermitianOperator& v1,
                          const HermitianOperator& v2, double beta, const TimeGrid& grid);

DecayCurve noise_averaged_le(const HermitianOperator& h_b,
                             const std::vector<HermitianOperator>& couplings_b, double delta,
                             double beta, const TimeGrid& grid, int n_pairs, RngStream& rng);

// Uniform average over every ordered pair of sign vectors.
DecayCurve noise_averaged_le_exhaustive(const HermitianOperator& h_b,
                                        const std::vector<HermitianOperator>& couplings_b,
                                        double delta, double beta, const TimeGrid& grid);

DecayCurve coarse_grained_le(const HermitianOperator& h_b,
                             const std::vector<HermitianOperator>& couplings_b, double delta,
                             double beta, const TimeGrid& grid, RngStream& rng);

// Z_{beta/2}^2 / Z_beta with Z_beta = Tr(e^{-beta H})/d, so the factor is 1 at beta = 0.
double le_thermal_prefactor(const EigenDecomposition& h_b, double beta);

// Tr(rho_B^2) of a normalized pure state on A (x) B.
double purity_reduced(const ComplexVector& state, const BipartitePartition& part);

// Regularized OTOC of X_a = c_a + c_a^dagger and X_b for the SYK model, computed
// blockwise in the particle-number eigenbasis.
DecayCurve syk_otoc(const SykModel& model, const SykSpectrum& spectrum, double beta,
                    const TimeGrid& grid, bool normalize);

}  // namespace echolab
