#pragma once

// Independent reference tools for the unit tests. Nothing here calls into
// the library beyond its basic types.

#include <cmath>
#include <complex>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "echolab/linalg.hpp"

namespace testing {

using echolab::Complex;
using echolab::ComplexMatrix;
using echolab::ComplexVector;
using echolab::Index;

inline ComplexMatrix random_matrix(Index rows, Index cols, std::mt19937_64& gen) {
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = Complex(n(gen), n(gen));
  return m;
}

inline ComplexMatrix random_hermitian(Index d, std::mt19937_64& gen) {
  const ComplexMatrix g = random_matrix(d, d, gen);
  return (g + g.adjoint()) / 2.0;
}

inline ComplexVector random_state(Index d, std::mt19937_64& gen) {
  ComplexVector v = random_matrix(d, 1, gen);
  return v / v.norm();
}

// e^{-i H z} straight from the power-series based matrix exponential.
inline ComplexMatrix expm_propagator(const ComplexMatrix& h, Complex z) {
  const ComplexMatrix x = (Complex(0.0, -1.0) * z) * h;
  return x.exp();
}

inline ComplexMatrix naive_kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      for (Index k = 0; k < b.rows(); ++k)
        for (Index l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

// Tr_B by index loops, A is the leading factor.
inline ComplexMatrix naive_trace_b(const ComplexMatrix& m, Index da, Index db) {
  ComplexMatrix out = ComplexMatrix::Zero(da, da);
  for (Index i = 0; i < da; ++i)
    for (Index j = 0; j < da; ++j)
      for (Index k = 0; k < db; ++k) out(i, j) += m(i * db + k, j * db + k);
  return out;
}

inline ComplexMatrix naive_trace_a(const ComplexMatrix& m, Index da, Index db) {
  ComplexMatrix out = ComplexMatrix::Zero(db, db);
  for (Index k = 0; k < db; ++k)
    for (Index l = 0; l < db; ++l)
      for (Index i = 0; i < da; ++i) out(k, l) += m(i * db + k, i * db + l);
  return out;
}

inline double max_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace testing
