#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace echolab {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr double kHermiticityTolerance = 1e-10;

// Largest |M - M^dagger| entry.
double max_asymmetry(const ComplexMatrix& m);
double max_abs(const ComplexMatrix& m);

// Square matrix that equals its adjoint. Inputs within tolerance are
// symmetrized on construction; anything further off is rejected.
class HermitianOperator {
 public:
  HermitianOperator() = default;
  explicit HermitianOperator(const ComplexMatrix& m, double tol = kHermiticityTolerance);

  static HermitianOperator zero(Index d);
  static HermitianOperator identity(Index d);

  Index dim() const { return m_.rows(); }
  const ComplexMatrix& matrix() const { return m_; }

  HermitianOperator operator+(const HermitianOperator& other) const;
  HermitianOperator scaled(double s) const;

 private:
  ComplexMatrix m_;
};

enum class Subsystem { A, B };

struct BipartitePartition {
  Index d_a = 1;
  Index d_b = 1;

  BipartitePartition() = default;
  BipartitePartition(Index da, Index db);
  Index dim() const { return d_a * d_b; }
};

class EigenDecomposition {
 public:
  EigenDecomposition() = default;
  EigenDecomposition(RealVector eigenvalues, ComplexMatrix eigenvectors);

  Index dim() const { return values_.size(); }
  const RealVector& eigenvalues() const { return values_; }
  const ComplexMatrix& eigenvectors() const { return vectors_; }
  double spectral_radius() const;

  // U^dagger M U and its inverse map.
  ComplexMatrix to_eigenbasis(const ComplexMatrix& m) const;
  ComplexMatrix from_eigenbasis(const ComplexMatrix& m) const;

 private:
  RealVector values_;
  ComplexMatrix vectors_;
};

EigenDecomposition eig_hermitian(const HermitianOperator& h);

// Diagonal of e^{-i E z}; throws NumericalError when any factor overflows.
ComplexVector propagator_phases(const RealVector& energies, Complex z);

// U diag(e^{-i E_k z}) U^dagger.
ComplexMatrix propagator(const EigenDecomposition& decomp, Complex z);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

// Trace over subsystem `over`.
ComplexMatrix partial_trace(const ComplexMatrix& m, const BipartitePartition& part, Subsystem over);

// A (x) I_B for Subsystem::A, I_A (x) B for Subsystem::B.
ComplexMatrix embed(const ComplexMatrix& local, const BipartitePartition& part, Subsystem where);

// Diagonal of (e^{-beta H}/Z)^power in the eigenbasis, ordered like the eigenvalues.
RealVector thermal_weight_diagonal(const RealVector& energies, double beta, double power);

// (e^{-beta H}/Z)^power in the computational basis. beta may be +infinity.
ComplexMatrix thermal_weight(const EigenDecomposition& decomp, double beta, double power);

// Tr(A^dagger B).
Complex hs_inner(const ComplexMatrix& a, const ComplexMatrix& b);

// Tr(X Y) without forming the product.
Complex trace_product(const ComplexMatrix& x, const ComplexMatrix& y);

}  // namespace echolab
