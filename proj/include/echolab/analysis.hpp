#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "echolab/correlators.hpp"

namespace echolab {

enum class DecayModel { EarlyGrowth, Exponential, Gaussian, QuadraticRateLaw, PowerLaw };

std::string to_string(DecayModel model);
DecayModel decay_model_from_string(const std::string& name);

struct FitWindow {
  double t_lo = 0.0;
  double t_hi = 0.0;
};

struct DecayFit {
  DecayModel model = DecayModel::Exponential;
  double rate_lambda = 0.0;
  double prefactor_epsilon = 0.0;
  double plateau = 0.0;
  FitWindow window;
  double r_squared = 0.0;
  double residual_sum = 0.0;
  std::size_t n_points = 0;
  bool weighted = false;
  bool ambiguous = false;
  double scrambling_time = 0.0;  // early growth only
  double exponent = 2.0;         // power-law fits only
};

// Module defaults for auto-selected windows.
inline constexpr double kDecayWindowHi = 0.8;
inline constexpr double kDecayWindowLo = 0.2;
inline constexpr double kGrowthWindowLo = 1e-5;
inline constexpr double kGrowthWindowHi = 0.1;
inline constexpr double kPlateauTailFraction = 0.1;

struct FitOptions {
  std::optional<FitWindow> window;  // explicit time window, overrides amplitude bounds
  double amplitude_hi = kDecayWindowHi;
  double amplitude_lo = kDecayWindowLo;
  double growth_lo = kGrowthWindowLo;
  double growth_hi = kGrowthWindowHi;
  bool subtract_plateau = true;
  bool use_weights = true;
};

// Tail average over the last 10% of the grid (at least one point).
double estimate_plateau(const DecayCurve& curve);

// log(1 - mean) = log(epsilon) + lambda t.
DecayFit fit_early_growth(const DecayCurve& curve, const FitOptions& options = {});
// mean - plateau = c exp(-lambda t).
DecayFit fit_exponential(const DecayCurve& curve, const FitOptions& options = {});
// mean - plateau = c exp(-(lambda t)^2).
DecayFit fit_gaussian(const DecayCurve& curve, const FitOptions& options = {});
// Smaller residual_sum wins; a relative gap within 1% flags the result ambiguous.
DecayFit model_select(const DecayCurve& curve, const FitOptions& options = {});

// lambda = c g^power through the origin.
DecayFit fit_power_law(const std::vector<std::pair<double, double>>& points, double power);
DecayFit fit_rate_law(const std::vector<std::pair<double, double>>& points);

// Synthesizes the model curve for a fit on a grid (used for overlays and idempotence checks).
std::vector<double> evaluate_fit(const DecayFit& fit, const std::vector<double>& times);

}  // namespace echolab
