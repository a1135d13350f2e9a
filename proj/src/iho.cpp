#include "echolab/iho.hpp"

#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "echolab/error.hpp"

namespace echolab {

namespace {

void require_finite_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw InvalidArgument(std::string(what) + " must be positive and finite");
}

}  // namespace

void IhoParams::validate() const {
  require_finite_positive(m1, "IhoParams: m1");
  require_finite_positive(m2, "IhoParams: m2");
  if (!(omega1 >= 0.0) || !std::isfinite(omega1) || !(omega2 >= 0.0) || !std::isfinite(omega2))
    throw InvalidArgument("IhoParams: frequency magnitudes must be finite and nonnegative");
  if (!std::isfinite(delta)) throw InvalidArgument("IhoParams: delta must be finite");
}

double IhoParams::c1_sq() const { return gaussian_moment(m2); }
double IhoParams::c2_sq() const { return gaussian_moment(m1); }

double gaussian_moment(double width) {
  if (!(width > 0.0) || !std::isfinite(width))
    throw InvalidArgument("gaussian_moment: width must be positive and finite");
  // |psi|^2 ~ exp(-2 x^2 / w) has variance w / 4.
  return width / 4.0;
}

NormalModeData normal_modes(const IhoParams& p) {
  p.validate();
  if (p.delta == 0.0)
    throw InvalidArgument(
        "normal_modes: delta = 0 leaves the oscillators uncoupled; treat x1 and x2 as the normal "
        "modes directly");
  const double k1 = p.m1 * p.signed_omega1_sq();
  const double k2 = p.m2 * p.signed_omega2_sq();
  const double ratio = p.m1 / p.m2;
  NormalModeData nm;
  // The sign of D is fixed by requiring the y1 y2 coefficient to vanish.
  nm.d = p.m1 * (p.signed_omega2_sq() - p.signed_omega1_sq()) / p.delta;
  const double root = std::hypot(nm.d, 2.0 * std::sqrt(ratio));
  // Use the non-cancelling branch and recover the partner from eta xi = m1/m2.
  if (nm.d >= 0.0) {
    nm.eta = 0.5 * (root + nm.d);
    nm.xi = ratio / nm.eta;
  } else {
    nm.xi = 0.5 * (root - nm.d);
    nm.eta = ratio / nm.xi;
  }
  nm.mass1 = 0.5 * (p.m1 + nm.eta * nm.eta * p.m2);
  nm.mass2 = 0.5 * (p.m1 + nm.xi * nm.xi * p.m2);
  nm.stiffness1 = 0.5 * (k1 + 2.0 * p.delta * nm.eta + nm.eta * nm.eta * k2);
  nm.stiffness2 = 0.5 * (k1 - 2.0 * p.delta * nm.xi + nm.xi * nm.xi * k2);
  const double cross = 0.5 * (k1 + p.delta * (nm.eta - nm.xi) - nm.eta * nm.xi * k2);
  const double scale =
      0.5 * (std::abs(k1) + std::abs(p.delta) * (nm.eta + nm.xi) + nm.eta * nm.xi * std::abs(k2));
  nm.cross_term = scale > 0.0 ? std::abs(cross) / scale : 0.0;
  return nm;
}

void QuadraticHamiltonian::validate() const {
  const Index n = mass.rows();
  if (n < 1 || mass.cols() != n || potential.rows() != n || potential.cols() != n ||
      linear.size() != n)
    throw InvalidArgument("QuadraticHamiltonian: inconsistent dimensions");
  if (!mass.allFinite() || !potential.allFinite() || !linear.allFinite())
    throw InvalidArgument("QuadraticHamiltonian: non-finite entries");
  if ((mass - mass.transpose()).cwiseAbs().maxCoeff() > 1e-12 * mass.cwiseAbs().maxCoeff() ||
      (potential - potential.transpose()).cwiseAbs().maxCoeff() >
          1e-12 * std::max(1.0, potential.cwiseAbs().maxCoeff()))
    throw InvalidArgument("QuadraticHamiltonian: mass and potential matrices must be symmetric");
  if (mass.llt().info() != Eigen::Success)
    throw InvalidArgument("QuadraticHamiltonian: mass matrix must be positive definite");
}

RealMatrix symplectic_form(int n_modes) {
  const Index n = n_modes;
  RealMatrix omega = RealMatrix::Zero(2 * n, 2 * n);
  omega.topRightCorner(n, n) = RealMatrix::Identity(n, n);
  omega.bottomLeftCorner(n, n) = -RealMatrix::Identity(n, n);
  return omega;
}

void GaussianState::validate(double uncertainty_tol) const {
  const Index dim = mean.size();
  if (dim < 2 || dim % 2 != 0 || cov.rows() != dim || cov.cols() != dim)
    throw InvalidArgument("GaussianState: mean must have even length matching the covariance");
  if (!mean.allFinite() || !cov.allFinite())
    throw InvalidArgument("GaussianState: non-finite entries");
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw InvalidArgument("GaussianState: covariance is not symmetric");
  const ComplexMatrix check =
      cov.cast<Complex>() + Complex(0.0, 0.5) * symplectic_form(n_modes()).cast<Complex>();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(check, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -uncertainty_tol * scale)
    throw InvalidArgument("GaussianState: covariance violates the uncertainty relation");
}

double GaussianState::purity() const {
  const double det = cov.determinant();
  if (!(det > 0.0))
    throw NumericalError("GaussianState::purity: covariance determinant is not positive; "
                         "the state is too squeezed for double precision");
  return 1.0 / (std::pow(2.0, n_modes()) * std::sqrt(det));
}

GaussianState GaussianState::reduced(int mode) const {
  const int n = n_modes();
  if (mode < 0 || mode >= n) throw InvalidArgument("GaussianState::reduced: mode out of range");
  const Index ix[2] = {mode, n + mode};
  GaussianState out{RealVector(2), RealMatrix(2, 2)};
  for (int i = 0; i < 2; ++i) {
    out.mean[i] = mean[ix[i]];
    for (int j = 0; j < 2; ++j) out.cov(i, j) = cov(ix[i], ix[j]);
  }
  return out;
}

AffineFlow affine_flow(const QuadraticHamiltonian& h, double t) {
  h.validate();
  if (!std::isfinite(t)) throw InvalidArgument("affine_flow: time must be finite");
  const Index n = h.n_modes();
  RealMatrix hm = RealMatrix::Zero(2 * n, 2 * n);
  hm.topLeftCorner(n, n) = h.potential;
  hm.bottomRightCorner(n, n) = h.mass.inverse();
  RealVector lin = RealVector::Zero(2 * n);
  lin.head(n) = h.linear;
  const RealMatrix omega = symplectic_form(static_cast<int>(n));
  // dr/dt = Omega (Hm r + l), embedded as a linear flow on (r, 1).
  RealMatrix gen = RealMatrix::Zero(2 * n + 1, 2 * n + 1);
  gen.topLeftCorner(2 * n, 2 * n) = omega * hm;
  gen.topRightCorner(2 * n, 1) = omega * lin;
  const RealMatrix e = (gen * t).exp();
  if (!e.allFinite()) {
    std::ostringstream os;
    os << "affine_flow: phase-space flow overflowed at t = " << t;
    throw NumericalError(os.str());
  }
  return AffineFlow{e.topLeftCorner(2 * n, 2 * n), e.topRightCorner(2 * n, 1)};
}

namespace {

void check_blowup(const RealMatrix& cov, double t) {
  const double peak = cov.allFinite() ? cov.cwiseAbs().maxCoeff() : INFINITY;
  if (!(peak <= kCovarianceBlowup)) {
    std::ostringstream os;
    os << "Gaussian evolution: covariance entries reach " << peak << " at t = " << t
       << " (limit " << kCovarianceBlowup << ")";
    throw NumericalError(os.str());
  }
}

}  // namespace

GaussianState evolve_gaussian(const GaussianState& state, const QuadraticHamiltonian& h, double t) {
  if (state.mean.size() != 2 * static_cast<Index>(h.n_modes()))
    throw InvalidArgument("evolve_gaussian: state and Hamiltonian mode counts differ");
  const AffineFlow flow = affine_flow(h, t);
  GaussianState out;
  out.mean = flow.s * state.mean + flow.shift;
  const RealMatrix cov = flow.s * state.cov * flow.s.transpose();
  out.cov = 0.5 * (cov + cov.transpose());
  check_blowup(out.cov, t);
  return out;
}

double gaussian_overlap(const GaussianState& a, const GaussianState& b) {
  if (a.mean.size() != b.mean.size())
    throw InvalidArgument("gaussian_overlap: mode counts differ");
  const RealMatrix sum = a.cov + b.cov;
  const Eigen::LLT<RealMatrix> llt(sum);
  if (llt.info() != Eigen::Success)
    throw NumericalError("gaussian_overlap: summed covariance is not positive definite");
  const RealVector diff = a.mean - b.mean;
  const double q = diff.dot(llt.solve(diff));
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return std::exp(-0.5 * q - 0.5 * log_det);
}

QuadraticHamiltonian iho_hamiltonian(const IhoParams& p) {
  p.validate();
  QuadraticHamiltonian h;
  h.mass = RealVector((RealVector(2) << p.m1, p.m2).finished()).asDiagonal();
  h.potential.resize(2, 2);
  h.potential << p.m1 * p.signed_omega1_sq(), p.delta, p.delta, p.m2 * p.signed_omega2_sq();
  h.linear = RealVector::Zero(2);
  return h;
}

QuadraticHamiltonian single_mode_hamiltonian(double mass, double omega, bool inverted,
                                             double linear) {
  require_finite_positive(mass, "single_mode_hamiltonian: mass");
  if (!(omega >= 0.0) || !std::isfinite(omega))
    throw InvalidArgument("single_mode_hamiltonian: frequency must be finite and nonnegative");
  QuadraticHamiltonian h;
  h.mass = RealMatrix::Constant(1, 1, mass);
  h.potential = RealMatrix::Constant(1, 1, (inverted ? -1.0 : 1.0) * mass * omega * omega);
  h.linear = RealVector::Constant(1, linear);
  return h;
}

GaussianState iho_initial_state(const IhoParams& p) {
  p.validate();
  const double c1 = p.c1_sq(), c2 = p.c2_sq();
  GaussianState s{RealVector::Zero(4), RealMatrix::Zero(4, 4)};
  s.cov.diagonal() << c1, c2, 0.25 / c1, 0.25 / c2;
  return s;
}

DecayCurve iho_otoc(const IhoParams& p, const TimeGrid& grid) {
  const QuadraticHamiltonian h = iho_hamiltonian(p);
  const GaussianState s0 = iho_initial_state(p);
  std::vector<double> values;
  for (double t : grid.times()) {
    const GaussianState s = evolve_gaussian(s0, h, t);
    // The global state is pure, so both reduced purities agree. The block with
    // smaller entries suffers less cancellation in its 2x2 determinant.
    const GaussianState r1 = s.reduced(0), r2 = s.reduced(1);
    const GaussianState& r =
        r1.cov.cwiseAbs().maxCoeff() <= r2.cov.cwiseAbs().maxCoeff() ? r1 : r2;
    const double det = r.cov(0, 0) * r.cov(1, 1) - r.cov(0, 1) * r.cov(1, 0);
    values.push_back(std::min(1.0, 0.5 / std::sqrt(det)));
  }
  DecayCurve c;
  c.grid = grid;
  c.mean = values;
  c.raw_mean = values;
  c.std_error.assign(values.size(), 0.0);
  c.label = "otoc";
  return c;
}

IhoEcho iho_le_exact(const IhoParams& p, const TimeGrid& grid) {
  p.validate();
  const double g = p.delta * std::sqrt(p.c1_sq());
  const QuadraticHamiltonian hp = single_mode_hamiltonian(p.m2, p.omega2, p.inverted2, g);
  const QuadraticHamiltonian hm = single_mode_hamiltonian(p.m2, p.omega2, p.inverted2, -g);
  const double c2 = p.c2_sq();
  const RealVector sigma0_inv = (RealVector(2) << 1.0 / c2, 4.0 * c2).finished();
  const RealMatrix omega = symplectic_form(1);
  std::vector<double> m1_values, m_values;
  for (double t : grid.times()) {
    const AffineFlow fp = affine_flow(hp, t);
    const AffineFlow fm = affine_flow(hm, t);
    check_blowup(fp.s * fp.s.transpose() * c2, t);
    // Both evolutions share S, so the overlap depends only on the mean offset,
    // pulled back to t = 0 with the exact symplectic inverse -Omega S^T Omega.
    const RealVector diff = fp.shift - fm.shift;
    const RealVector diff0 = -omega * fp.s.transpose() * omega * diff;
    const double q = 0.25 * diff0.cwiseProduct(sigma0_inv).dot(diff0);
    const double m1 = std::exp(-q);
    m1_values.push_back(m1);
    m_values.push_back(0.5 + 0.5 * m1);
  }
  auto make = [&grid](std::vector<double> v, const char* label) {
    DecayCurve c;
    c.grid = grid;
    c.raw_mean = v;
    c.mean = std::move(v);
    c.std_error.assign(grid.size(), 0.0);
    c.label = label;
    return c;
  };
  return IhoEcho{make(std::move(m_values), "le"), make(std::move(m1_values), "le_m1")};
}

BchTerms bch_terms(double mass, double omega, bool inverted, double t) {
  require_finite_positive(mass, "bch_terms: mass");
  if (!(omega >= 0.0) || !std::isfinite(omega))
    throw InvalidArgument("bch_terms: frequency must be finite and nonnegative");
  BchTerms b;
  const double x = omega * t;
  if (std::abs(x) < 1e-2) {
    // Series forms avoid cancellation near x = 0.
    const double s = inverted ? 1.0 : -1.0;
    const double x2 = x * x;
    b.sigma_x_coeff = 2.0 * t * (1.0 + s * x2 / 6.0 + x2 * x2 / 120.0);
    b.sigma_p_coeff = t * t / mass * (1.0 + s * x2 / 12.0 + x2 * x2 / 360.0);
    b.gamma = -(2.0 / 3.0) * t * t * t / mass * (1.0 + s * x2 / 20.0 + x2 * x2 / 840.0);
    return b;
  }
  if (inverted) {
    const double sh_half = std::sinh(0.5 * x);
    b.sigma_x_coeff = 2.0 * std::sinh(x) / omega;
    b.sigma_p_coeff = 4.0 * sh_half * sh_half / (mass * omega * omega);
    b.gamma = 4.0 * (x - std::sinh(x)) / (mass * omega * omega * omega);
  } else {
    const double s_half = std::sin(0.5 * x);
    b.sigma_x_coeff = 2.0 * std::sin(x) / omega;
    b.sigma_p_coeff = 4.0 * s_half * s_half / (mass * omega * omega);
    b.gamma = 4.0 * (std::sin(x) - x) / (mass * omega * omega * omega);
  }
  return b;
}

BchResult iho_le_bch(const IhoParams& p, const TimeGrid& grid) {
  p.validate();
  const double amp = 4.0 * p.delta * p.delta * p.c1_sq() * p.c2_sq();
  BchResult r;
  std::vector<double> values;
  for (double t : grid.times()) {
    const double x = p.omega2 * t;
    double f = t;  // sinh(x)/omega or sin(x)/omega, with the omega -> 0 limit
    if (p.omega2 > 0.0) f = (p.inverted2 ? std::sinh(x) : std::sin(x)) / p.omega2;
    values.push_back(1.0 - amp * f * f);
    r.terms.push_back(bch_terms(p.m2, p.omega2, p.inverted2, t));
  }
  r.m1.grid = grid;
  r.m1.raw_mean = values;
  r.m1.mean = std::move(values);
  r.m1.std_error.assign(grid.size(), 0.0);
  r.m1.label = "le_m1_bch";
  return r;
}

}  // namespace echolab
