#pragma once

#include <vector>

#include "echolab/correlators.hpp"
#include "echolab/linalg.hpp"

namespace echolab {

// Two coupled oscillators,
//   H = sum_i p_i^2/(2 m_i) + s_i m_i omega_i^2 x_i^2 / 2 + delta x1 x2,
// with s_i = -1 for an inverted mode and +1 otherwise. Frequencies are stored
// as nonnegative magnitudes.
struct IhoParams {
  double m1 = 1e5;
  double m2 = 1.0;
  double omega1 = 0.0;
  double omega2 = 1.0;
  double delta = 1e-5;
  bool inverted1 = true;
  bool inverted2 = true;

  void validate() const;
  // Curvature omega^2 with the inversion sign applied.
  double signed_omega1_sq() const { return (inverted1 ? -1.0 : 1.0) * omega1 * omega1; }
  double signed_omega2_sq() const { return (inverted2 ? -1.0 : 1.0) * omega2 * omega2; }
  // <x^2> of psi_1 ~ exp(-x1^2/m2) and psi_2 ~ exp(-x2^2/m1).
  double c1_sq() const;
  double c2_sq() const;
};

// x1 = (y1 + y2)/sqrt2, x2 = (eta y1 - xi y2)/sqrt2 decouples the modes.
struct NormalModeData {
  double eta = 0.0;
  double xi = 0.0;
  double d = 0.0;
  double mass1 = 0.0;       // effective masses
  double mass2 = 0.0;
  double stiffness1 = 0.0;  // effective m omega^2, signed
  double stiffness2 = 0.0;
  double cross_term = 0.0;  // residual y1 y2 coefficient relative to its summands
};

NormalModeData normal_modes(const IhoParams& p);

// H = p^T M^{-1} p / 2 + x^T K x / 2 + l^T x.
struct QuadraticHamiltonian {
  RealMatrix mass;
  RealMatrix potential;
  RealVector linear;

  int n_modes() const { return static_cast<int>(mass.rows()); }
  void validate() const;
};

// Means and symmetrized covariances in (x_1..x_n, p_1..p_n) order; vacuum cov = I/2.
struct GaussianState {
  RealVector mean;
  RealMatrix cov;

  int n_modes() const { return static_cast<int>(mean.size() / 2); }
  void validate(double uncertainty_tol = 1e-8) const;
  double purity() const;  // 1 / (2^n sqrt(det cov))
  GaussianState reduced(int mode) const;
};

RealMatrix symplectic_form(int n_modes);

// r(t) = S r(0) + shift for the classical flow of H.
struct AffineFlow {
  RealMatrix s;
  RealVector shift;
};

AffineFlow affine_flow(const QuadraticHamiltonian& h, double t);
GaussianState evolve_gaussian(const GaussianState& state, const QuadraticHamiltonian& h, double t);

// Tr(rho1 rho2) = exp(-Delta^T (cov1 + cov2)^{-1} Delta / 2) / sqrt(det(cov1 + cov2)).
double gaussian_overlap(const GaussianState& a, const GaussianState& b);

double gaussian_moment(double width);

QuadraticHamiltonian iho_hamiltonian(const IhoParams& p);
QuadraticHamiltonian single_mode_hamiltonian(double mass, double omega, bool inverted,
                                             double linear);
// Product state psi_1(x1) psi_2(x2).
GaussianState iho_initial_state(const IhoParams& p);

// Reduced purity of mode 2 after evolving the product state.
DecayCurve iho_otoc(const IhoParams& p, const TimeGrid& grid);

struct IhoEcho {
  DecayCurve m;   // 1/2 + M1/2
  DecayCurve m1;  // squared overlap of the two shifted evolutions
};

IhoEcho iho_le_exact(const IhoParams& p, const TimeGrid& grid);

// Sigma(t) = sigma_x_coeff x + sigma_p_coeff p + sigma_const, and Gamma(t).
struct BchTerms {
  double sigma_x_coeff = 0.0;
  double sigma_p_coeff = 0.0;
  double sigma_const = 0.0;
  double gamma = 0.0;
};

BchTerms bch_terms(double mass, double omega, bool inverted, double t);

struct BchResult {
  DecayCurve m1;
  std::vector<BchTerms> terms;
};

// M1 = 1 - 4 delta^2 c1^2 c2^2 sinh^2(omega2 t) / omega2^2 (sin^2 for a normal mode).
BchResult iho_le_bch(const IhoParams& p, const TimeGrid& grid);

inline constexpr double kCovarianceBlowup = 1e100;

}  // namespace echolab
