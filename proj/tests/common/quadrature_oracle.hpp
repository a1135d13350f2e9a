#pragma once

// Single-mode propagator quadrature, used as an independent reference for the
// Gaussian-state evolution. Shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "echolab/iho.hpp"

namespace oracle {

// One oscillator with H = p^2/2m + k x^2/2 + lambda x, k = -m w^2 (inverted) or +m w^2.
struct OracleSetup {
  double mass, omega;
  bool inverted;
  double lambda;
  double center, width;  // initial psi ~ exp(-(x - center)^2 / (4 width^2)), real
};

struct QuadratureMoments {
  double mx, mp, vxx, vpp, vxp;
};

struct Wave {
  std::vector<double> x;
  std::vector<echolab::Complex> psi, dpsi;  // psi and -i d/dx psi on x
  double h;
};

inline double signed_stiffness(const OracleSetup& s) {
  return (s.inverted ? -1.0 : 1.0) * s.mass * s.omega * s.omega;
}

// Analytic centre and width, used only to place the output grid.
inline void grid_extent(const OracleSetup& s, double t, double& mid, double& sig) {
  const double x0 = -s.lambda / signed_stiffness(s);
  const double c = s.inverted ? std::cosh(s.omega * t) : std::cos(s.omega * t);
  const double sn = s.inverted ? std::sinh(s.omega * t) : std::sin(s.omega * t);
  mid = x0 + (s.center - x0) * c;
  sig = std::sqrt(s.width * s.width * c * c +
                  sn * sn / (4.0 * s.width * s.width * s.mass * s.mass * s.omega * s.omega));
}

// psi(x, t) = int K(x, x', t) psi0(x') dx' with the Mehler kernel (hyperbolic for
// the inverted case), shifted to the potential's stationary point. Normalization
// constants are dropped; all observables below are ratios.
inline Wave propagate(const OracleSetup& s, double t, const std::vector<double>& xs) {
  const double x0 = -s.lambda / signed_stiffness(s);
  const double w = s.omega * t;
  const double sn = s.inverted ? std::sinh(w) : std::sin(w);
  const double cs = s.inverted ? std::cosh(w) : std::cos(w);
  const double coef = s.mass * s.omega / (2.0 * sn);

  const int n_in = 4001;
  const double lo = s.center - 12.0 * s.width, hi = s.center + 12.0 * s.width;
  const double hin = (hi - lo) / (n_in - 1);
  std::vector<double> up(n_in);
  std::vector<echolab::Complex> f(n_in);
  for (int k = 0; k < n_in; ++k) {
    const double xp = lo + k * hin;
    up[k] = xp - x0;
    const double g = (xp - s.center) / s.width;
    f[k] = std::exp(-0.25 * g * g) * std::exp(echolab::Complex(0.0, coef * cs * up[k] * up[k]));
  }
  Wave out;
  out.x = xs;
  out.h = xs[1] - xs[0];
  for (double x : xs) {
    const double u = x - x0;
    echolab::Complex acc = 0.0, dacc = 0.0;
    for (int k = 0; k < n_in; ++k) {
      const echolab::Complex kern = f[k] * std::exp(echolab::Complex(0.0, -2.0 * coef * u * up[k]));
      acc += kern;
      dacc += (2.0 * coef) * (u * cs - up[k]) * kern;
    }
    const echolab::Complex outer = std::exp(echolab::Complex(0.0, coef * cs * u * u));
    out.psi.push_back(outer * acc * hin);
    out.dpsi.push_back(outer * dacc * hin);
  }
  return out;
}

inline QuadratureMoments moments(const Wave& w) {
  double n = 0, sx = 0, sxx = 0, sp = 0, spp = 0, sxp = 0;
  for (std::size_t i = 0; i < w.x.size(); ++i) {
    const double rho = std::norm(w.psi[i]);
    const double x = w.x[i];
    const echolab::Complex pp = std::conj(w.psi[i]) * w.dpsi[i];
    n += rho;
    sx += x * rho;
    sxx += x * x * rho;
    sp += pp.real();
    spp += std::norm(w.dpsi[i]);
    sxp += x * pp.real();
  }
  QuadratureMoments m;
  m.mx = sx / n;
  m.mp = sp / n;
  m.vxx = sxx / n - m.mx * m.mx;
  m.vpp = spp / n - m.mp * m.mp;
  m.vxp = sxp / n - m.mx * m.mp;
  return m;
}

inline double quadrature_overlap(const Wave& a, const Wave& b) {
  echolab::Complex ab = 0.0;
  double na = 0, nb = 0;
  for (std::size_t i = 0; i < a.x.size(); ++i) {
    ab += std::conj(a.psi[i]) * b.psi[i];
    na += std::norm(a.psi[i]);
    nb += std::norm(b.psi[i]);
  }
  return std::norm(ab) / (na * nb);
}

inline echolab::GaussianState initial_single(const OracleSetup& s) {
  echolab::GaussianState g{echolab::RealVector(2), echolab::RealMatrix::Zero(2, 2)};
  g.mean << s.center, 0.0;
  g.cov(0, 0) = s.width * s.width;
  g.cov(1, 1) = 0.25 / (s.width * s.width);
  return g;
}

// Largest relative deviation between the Gaussian-state evolution and the
// quadrature oracle over the given times. Quantities that pass through zero are
// measured against 1e-3 of their natural scale.
inline double quadrature_deviation(const OracleSetup& s, const std::vector<double>& times) {
  using namespace echolab;
  OracleSetup minus = s;
  minus.lambda = -s.lambda;
  const GaussianState g0 = initial_single(s);
  const QuadraticHamiltonian hp = single_mode_hamiltonian(s.mass, s.omega, s.inverted, s.lambda);
  const QuadraticHamiltonian hm = single_mode_hamiltonian(s.mass, s.omega, s.inverted, -s.lambda);
  double worst = 0.0;
  auto dev = [&worst](double got, double want, double scale) {
    worst = std::max(worst, std::abs(got - want) / std::max(std::abs(want), scale));
  };
  for (double t : times) {
    double mid_p, sig_p, mid_m, sig_m;
    grid_extent(s, t, mid_p, sig_p);
    grid_extent(minus, t, mid_m, sig_m);
    const double lo = std::min(mid_p - 12.0 * sig_p, mid_m - 12.0 * sig_m);
    const double hi = std::max(mid_p + 12.0 * sig_p, mid_m + 12.0 * sig_m);
    const int n_out = 1201;
    std::vector<double> xs(n_out);
    for (int i = 0; i < n_out; ++i) xs[i] = lo + (hi - lo) * i / (n_out - 1);

    const Wave wp = propagate(s, t, xs);
    const Wave wm = propagate(minus, t, xs);
    const QuadratureMoments q = moments(wp);
    const GaussianState gp = evolve_gaussian(g0, hp, t);
    const GaussianState gm = evolve_gaussian(g0, hm, t);

    const double cov_scale = 1e-3 * gp.cov.cwiseAbs().maxCoeff();
    const double mean_scale = 1e-3 * std::sqrt(gp.cov(0, 0) + gp.cov(1, 1));
    dev(gp.mean[0], q.mx, mean_scale);
    dev(gp.mean[1], q.mp, mean_scale);
    dev(gp.cov(0, 0), q.vxx, cov_scale);
    dev(gp.cov(1, 1), q.vpp, cov_scale);
    dev(gp.cov(0, 1), q.vxp, cov_scale);
    dev(gaussian_overlap(gp, gm), quadrature_overlap(wp, wm), 1e-12);
  }
  return worst;
}

}  // namespace oracle
