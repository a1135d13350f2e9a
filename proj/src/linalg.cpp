#include "echolab/linalg.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "echolab/error.hpp"

namespace echolab {

namespace {

void require_square(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    std::ostringstream os;
    os << what << ": expected a nonempty square matrix, got " << m.rows() << "x" << m.cols();
    throw InvalidArgument(os.str());
  }
}

void require_finite(const ComplexMatrix& m, const char* what) {
  if (!m.allFinite()) throw NumericalError(std::string(what) + ": non-finite entries");
}

// Largest exponent std::exp can take without overflowing a double.
const double kMaxExponent = std::log(std::numeric_limits<double>::max());

}  // namespace

double max_asymmetry(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double max_abs(const ComplexMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

HermitianOperator::HermitianOperator(const ComplexMatrix& m, double tol) {
  require_square(m, "HermitianOperator");
  require_finite(m, "HermitianOperator");
  const double asym = max_asymmetry(m);
  if (asym > tol) {
    std::ostringstream os;
    os << "HermitianOperator: matrix is not Hermitian (max |M - M^dagger| = " << asym
       << ", tolerance " << tol << ")";
    throw InvalidArgument(os.str());
  }
  m_ = 0.5 * (m + m.adjoint());
}

HermitianOperator HermitianOperator::zero(Index d) {
  return HermitianOperator(ComplexMatrix::Zero(d, d));
}

HermitianOperator HermitianOperator::identity(Index d) {
  return HermitianOperator(ComplexMatrix::Identity(d, d));
}

HermitianOperator HermitianOperator::operator+(const HermitianOperator& other) const {
  if (dim() != other.dim()) throw InvalidArgument("HermitianOperator sum: dimension mismatch");
  HermitianOperator out;
  out.m_ = m_ + other.m_;
  return out;
}

HermitianOperator HermitianOperator::scaled(double s) const {
  HermitianOperator out;
  out.m_ = s * m_;
  return out;
}

BipartitePartition::BipartitePartition(Index da, Index db) : d_a(da), d_b(db) {
  if (da < 1 || db < 1) throw InvalidArgument("BipartitePartition: dimensions must be positive");
}

EigenDecomposition::EigenDecomposition(RealVector eigenvalues, ComplexMatrix eigenvectors)
    : values_(std::move(eigenvalues)), vectors_(std::move(eigenvectors)) {
  if (vectors_.rows() != values_.size() || vectors_.cols() != values_.size())
    throw InvalidArgument("EigenDecomposition: eigenvector matrix does not match eigenvalue count");
}

double EigenDecomposition::spectral_radius() const {
  return values_.size() == 0 ? 0.0 : values_.cwiseAbs().maxCoeff();
}

ComplexMatrix EigenDecomposition::to_eigenbasis(const ComplexMatrix& m) const {
  if (m.rows() != dim() || m.cols() != dim())
    throw InvalidArgument("to_eigenbasis: dimension mismatch");
  return vectors_.adjoint() * m * vectors_;
}

ComplexMatrix EigenDecomposition::from_eigenbasis(const ComplexMatrix& m) const {
  if (m.rows() != dim() || m.cols() != dim())
    throw InvalidArgument("from_eigenbasis: dimension mismatch");
  return vectors_ * m * vectors_.adjoint();
}

EigenDecomposition eig_hermitian(const HermitianOperator& h) {
  if (h.dim() == 0) throw InvalidArgument("eig_hermitian: empty operator");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h.matrix(), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw NumericalError("eig_hermitian: solver did not converge");
  return EigenDecomposition(solver.eigenvalues(), solver.eigenvectors());
}

ComplexVector propagator_phases(const RealVector& energies, Complex z) {
  ComplexVector out(energies.size());
  for (Index k = 0; k < energies.size(); ++k) {
    // e^{-i E z} has modulus e^{E Im z}.
    const double growth = energies[k] * z.imag();
    if (growth > kMaxExponent) {
      std::ostringstream os;
      os << "propagator: exponent E*Im(z) = " << growth << " overflows double range (E = "
         << energies[k] << ", z = " << z << ")";
      throw NumericalError(os.str());
    }
    out[k] = std::exp(Complex(growth, -energies[k] * z.real()));
  }
  return out;
}

ComplexMatrix propagator(const EigenDecomposition& decomp, Complex z) {
  const ComplexVector phases = propagator_phases(decomp.eigenvalues(), z);
  const ComplexMatrix& u = decomp.eigenvectors();
  return (u * phases.asDiagonal()) * u.adjoint();
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  const double rows = static_cast<double>(a.rows()) * static_cast<double>(b.rows());
  const double cols = static_cast<double>(a.cols()) * static_cast<double>(b.cols());
  constexpr double kLimit = 1 << 30;
  if (rows > kLimit || cols > kLimit || rows * cols > kLimit)
    throw InvalidArgument("kron: product dimensions exceed the dense storage limit");
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

ComplexMatrix partial_trace(const ComplexMatrix& m, const BipartitePartition& part, Subsystem over) {
  const Index da = part.d_a, db = part.d_b;
  if (m.rows() != part.dim() || m.cols() != part.dim()) {
    std::ostringstream os;
    os << "partial_trace: matrix is " << m.rows() << "x" << m.cols() << ", partition expects "
       << part.dim();
    throw InvalidArgument(os.str());
  }
  if (over == Subsystem::A) {
    ComplexMatrix out = ComplexMatrix::Zero(db, db);
    for (Index a = 0; a < da; ++a) out += m.block(a * db, a * db, db, db);
    return out;
  }
  ComplexMatrix out(da, da);
  for (Index a = 0; a < da; ++a)
    for (Index ap = 0; ap < da; ++ap) out(a, ap) = m.block(a * db, ap * db, db, db).trace();
  return out;
}

ComplexMatrix embed(const ComplexMatrix& local, const BipartitePartition& part, Subsystem where) {
  if (where == Subsystem::A) {
    if (local.rows() != part.d_a || local.cols() != part.d_a)
      throw InvalidArgument("embed: operator dimension does not match d_A");
    return kron(local, ComplexMatrix::Identity(part.d_b, part.d_b));
  }
  if (local.rows() != part.d_b || local.cols() != part.d_b)
    throw InvalidArgument("embed: operator dimension does not match d_B");
  return kron(ComplexMatrix::Identity(part.d_a, part.d_a), local);
}

RealVector thermal_weight_diagonal(const RealVector& energies, double beta, double power) {
  if (!(beta >= 0.0)) throw InvalidArgument("thermal_weight: beta must be nonnegative");
  if (!(power > 0.0) || !std::isfinite(power))
    throw InvalidArgument("thermal_weight: power must be positive and finite");
  const Index d = energies.size();
  if (d == 0) throw InvalidArgument("thermal_weight: empty spectrum");
  const double e0 = energies.minCoeff();
  RealVector out(d);
  if (std::isinf(beta)) {
    // Zero temperature: uniform weight on the (possibly degenerate) ground space.
    const double tol = 1e-12 * std::max(1.0, energies.cwiseAbs().maxCoeff());
    Index g = 0;
    for (Index k = 0; k < d; ++k) g += (energies[k] - e0 <= tol) ? 1 : 0;
    const double w = std::pow(1.0 / static_cast<double>(g), power);
    for (Index k = 0; k < d; ++k) out[k] = (energies[k] - e0 <= tol) ? w : 0.0;
    return out;
  }
  // Shifting by the ground energy keeps the largest Boltzmann factor at 1.
  double z = 0.0;
  for (Index k = 0; k < d; ++k) z += std::exp(-beta * (energies[k] - e0));
  const double log_z = std::log(z);
  for (Index k = 0; k < d; ++k) out[k] = std::exp(-power * (beta * (energies[k] - e0) + log_z));
  if (!(out.maxCoeff() > 0.0)) {
    std::ostringstream os;
    os << "thermal_weight: all weights underflow (beta*span*power = "
       << beta * (energies.maxCoeff() - e0) * power << ")";
    throw NumericalError(os.str());
  }
  return out;
}

ComplexMatrix thermal_weight(const EigenDecomposition& decomp, double beta, double power) {
  const RealVector w = thermal_weight_diagonal(decomp.eigenvalues(), beta, power);
  const ComplexMatrix& u = decomp.eigenvectors();
  return (u * w.cast<Complex>().asDiagonal()) * u.adjoint();
}

Complex hs_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidArgument("hs_inner: dimension mismatch");
  return (a.conjugate().cwiseProduct(b)).sum();
}

Complex trace_product(const ComplexMatrix& x, const ComplexMatrix& y) {
  if (x.cols() != y.rows() || x.rows() != y.cols())
    throw InvalidArgument("trace_product: dimension mismatch");
  return (x.cwiseProduct(y.transpose())).sum();
}

}  // namespace echolab
