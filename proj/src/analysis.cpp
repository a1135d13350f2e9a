#include "echolab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "echolab/error.hpp"

namespace echolab {

std::string to_string(DecayModel model) {
  switch (model) {
    case DecayModel::EarlyGrowth: return "early_growth";
    case DecayModel::Exponential: return "exponential";
    case DecayModel::Gaussian: return "gaussian";
    case DecayModel::QuadraticRateLaw: return "quadratic_rate_law";
    case DecayModel::PowerLaw: return "power_law";
  }
  return "unknown";
}

DecayModel decay_model_from_string(const std::string& name) {
  for (DecayModel m : {DecayModel::EarlyGrowth, DecayModel::Exponential, DecayModel::Gaussian,
                       DecayModel::QuadraticRateLaw, DecayModel::PowerLaw})
    if (to_string(m) == name) return m;
  throw InvalidArgument("unknown decay model '" + name + "'");
}

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// Weighted least squares for y = intercept + slope x.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<double>& w) {
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sw += w[i], sx += w[i] * x[i], sy += w[i] * y[i];
  const double xm = sx / sw, ym = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += w[i] * (x[i] - xm) * (x[i] - xm);
    sxy += w[i] * (x[i] - xm) * (y[i] - ym);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("fit: window abscissae are degenerate");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = ym - f.slope * xm;
  return f;
}

double r_squared_of(const std::vector<double>& y, const std::vector<double>& model,
                    double& residual_sum) {
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_res += (y[i] - model[i]) * (y[i] - model[i]);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  residual_sum = ss_res;
  if (!(ss_tot > 0.0)) return ss_res == 0.0 ? 1.0 : 0.0;
  return std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
}

std::vector<std::size_t> explicit_window(const DecayCurve& curve, const FitWindow& w) {
  if (!(w.t_hi >= w.t_lo)) throw InvalidArgument("fit window: t_hi must not be below t_lo");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < curve.grid.size(); ++i)
    if (curve.grid[i] >= w.t_lo && curve.grid[i] <= w.t_hi) idx.push_back(i);
  return idx;
}

// Weights (y/sigma)^2 for log-space fits when every point carries an error.
std::vector<double> log_weights(const DecayCurve& curve, const std::vector<std::size_t>& idx,
                                const std::vector<double>& y, bool use, bool& weighted) {
  std::vector<double> w(idx.size(), 1.0);
  weighted = false;
  if (!use) return w;
  for (std::size_t j = 0; j < idx.size(); ++j)
    if (!(curve.std_error[idx[j]] > 0.0)) return w;
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const double s = curve.std_error[idx[j]] / y[j];
    w[j] = 1.0 / (s * s);
  }
  weighted = true;
  return w;
}

void require_curve(const DecayCurve& curve, const char* what) {
  if (curve.mean.size() != curve.grid.size() || curve.std_error.size() != curve.grid.size())
    throw InvalidArgument(std::string(what) + ": malformed curve");
  if (curve.grid.size() < 2) throw InvalidArgument(std::string(what) + ": curve too short");
}

DecayFit fit_decay(const DecayCurve& curve, const FitOptions& options, DecayModel model) {
  const char* name = model == DecayModel::Exponential ? "fit_exponential" : "fit_gaussian";
  require_curve(curve, name);
  const double plateau = options.subtract_plateau ? estimate_plateau(curve) : 0.0;
  std::vector<std::size_t> idx;
  if (options.window) {
    idx = explicit_window(curve, *options.window);
  } else {
    const double a0 = curve.mean.front() - plateau;
    if (!(a0 > 0.0))
      throw InvalidArgument(std::string(name) + ": curve does not start above its plateau");
    std::size_t i = 0;
    const std::size_t n = curve.grid.size();
    while (i < n && (curve.mean[i] - plateau) / a0 > options.amplitude_hi) ++i;
    for (; i < n && (curve.mean[i] - plateau) / a0 >= options.amplitude_lo; ++i) idx.push_back(i);
  }
  if (idx.size() < 4) {
    std::ostringstream os;
    os << name << ": only " << idx.size() << " points in the fit window (need 4)";
    throw InvalidArgument(os.str());
  }
  std::vector<double> x, y, ly;
  for (std::size_t i : idx) {
    const double v = curve.mean[i] - plateau;
    if (!(v > 0.0)) {
      std::ostringstream os;
      os << name << ": nonpositive value " << v << " after plateau subtraction at t = "
         << curve.grid[i];
      throw InvalidArgument(os.str());
    }
    const double t = curve.grid[i];
    x.push_back(model == DecayModel::Exponential ? t : t * t);
    y.push_back(v);
    ly.push_back(std::log(v));
  }
  DecayFit fit;
  fit.model = model;
  fit.plateau = plateau;
  fit.n_points = idx.size();
  fit.window = {curve.grid[idx.front()], curve.grid[idx.back()]};
  const std::vector<double> w = log_weights(curve, idx, y, options.use_weights, fit.weighted);
  const LineFit line = fit_line(x, ly, w);
  fit.prefactor_epsilon = std::exp(line.intercept);
  if (model == DecayModel::Exponential) {
    fit.rate_lambda = -line.slope;
  } else {
    if (!(line.slope < 0.0))
      throw InvalidArgument("fit_gaussian: window does not decay in t^2 (nonnegative slope)");
    fit.rate_lambda = std::sqrt(-line.slope);
  }
  std::vector<double> obs, pred;
  for (std::size_t j = 0; j < idx.size(); ++j) {
    obs.push_back(curve.mean[idx[j]]);
    pred.push_back(plateau + std::exp(line.intercept + line.slope * x[j]));
  }
  fit.r_squared = r_squared_of(obs, pred, fit.residual_sum);
  return fit;
}

}  // namespace

double estimate_plateau(const DecayCurve& curve) {
  const std::size_t n = curve.mean.size();
  if (n == 0) throw InvalidArgument("estimate_plateau: empty curve");
  const auto tail = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(kPlateauTailFraction * static_cast<double>(n))));
  double s = 0.0;
  for (std::size_t i = n - tail; i < n; ++i) s += curve.mean[i];
  return s / static_cast<double>(tail);
}

DecayFit fit_early_growth(const DecayCurve& curve, const FitOptions& options) {
  require_curve(curve, "fit_early_growth");
  std::vector<std::size_t> idx;
  if (options.window) {
    idx = explicit_window(curve, *options.window);
  } else {
    std::size_t i = 0;
    const std::size_t n = curve.grid.size();
    while (i < n && 1.0 - curve.mean[i] < options.growth_lo) ++i;
    for (; i < n && 1.0 - curve.mean[i] <= options.growth_hi; ++i) idx.push_back(i);
  }
  if (idx.size() < 5) {
    std::ostringstream os;
    os << "fit_early_growth: only " << idx.size() << " points in the fit window (need 5)";
    throw InvalidArgument(os.str());
  }
  std::vector<double> x, u, lu;
  for (std::size_t i : idx) {
    const double v = 1.0 - curve.mean[i];
    if (!(v > 0.0)) {
      std::ostringstream os;
      os << "fit_early_growth: nonpositive 1 - mean = " << v << " at t = " << curve.grid[i];
      throw InvalidArgument(os.str());
    }
    x.push_back(curve.grid[i]);
    u.push_back(v);
    lu.push_back(std::log(v));
  }
  DecayFit fit;
  fit.model = DecayModel::EarlyGrowth;
  fit.n_points = idx.size();
  fit.window = {x.front(), x.back()};
  const std::vector<double> w = log_weights(curve, idx, u, options.use_weights, fit.weighted);
  const LineFit line = fit_line(x, lu, w);
  fit.rate_lambda = line.slope;
  fit.prefactor_epsilon = std::exp(line.intercept);
  fit.plateau = 1.0;
  fit.scrambling_time = std::log(1.0 / fit.prefactor_epsilon) / fit.rate_lambda;
  // Goodness of fit is judged in log space, where the growth is linear.
  std::vector<double> pred;
  for (double t : x) pred.push_back(line.intercept + line.slope * t);
  fit.r_squared = r_squared_of(lu, pred, fit.residual_sum);
  return fit;
}

DecayFit fit_exponential(const DecayCurve& curve, const FitOptions& options) {
  return fit_decay(curve, options, DecayModel::Exponential);
}

DecayFit fit_gaussian(const DecayCurve& curve, const FitOptions& options) {
  return fit_decay(curve, options, DecayModel::Gaussian);
}

DecayFit model_select(const DecayCurve& curve, const FitOptions& options) {
  require_curve(curve, "model_select");
  const auto below = std::count_if(curve.mean.begin(), curve.mean.end(),
                                   [](double v) { return v < 0.9; });
  if (below < 20) {
    std::ostringstream os;
    os << "model_select: only " << below << " points below 0.9 (need 20)";
    throw InvalidArgument(os.str());
  }
  std::optional<DecayFit> exp_fit, gauss_fit;
  std::string exp_err, gauss_err;
  try {
    exp_fit = fit_exponential(curve, options);
  } catch (const std::exception& e) {
    exp_err = e.what();
  }
  try {
    gauss_fit = fit_gaussian(curve, options);
  } catch (const std::exception& e) {
    gauss_err = e.what();
  }
  if (!exp_fit && !gauss_fit)
    throw InvalidArgument("model_select: both fits rejected [exponential: " + exp_err +
                          "] [gaussian: " + gauss_err + "]");
  if (!exp_fit) return *gauss_fit;
  if (!gauss_fit) return *exp_fit;
  const double re = exp_fit->residual_sum, rg = gauss_fit->residual_sum;
  DecayFit best = rg < re ? *gauss_fit : *exp_fit;
  best.ambiguous = std::abs(re - rg) <= 0.01 * std::max(re, rg);
  return best;
}

DecayFit fit_power_law(const std::vector<std::pair<double, double>>& points, double power) {
  if (points.size() < 4) throw InvalidArgument("fit_rate_law: need at least 4 points");
  double num = 0.0, den = 0.0;
  double g_lo = points.front().first, g_hi = points.front().first;
  for (const auto& [g, lam] : points) {
    if (!std::isfinite(g) || !std::isfinite(lam))
      throw InvalidArgument("fit_rate_law: non-finite point");
    const double gp = std::pow(g, power);
    num += lam * gp;
    den += gp * gp;
    g_lo = std::min(g_lo, g);
    g_hi = std::max(g_hi, g);
  }
  if (!(den > 0.0)) throw InvalidArgument("fit_rate_law: all abscissae vanish");
  DecayFit fit;
  fit.model = power == 2.0 ? DecayModel::QuadraticRateLaw : DecayModel::PowerLaw;
  fit.exponent = power;
  fit.rate_lambda = num / den;
  fit.window = {g_lo, g_hi};
  fit.n_points = points.size();
  std::vector<double> obs, pred;
  for (const auto& [g, lam] : points) {
    obs.push_back(lam);
    pred.push_back(fit.rate_lambda * std::pow(g, power));
  }
  fit.r_squared = r_squared_of(obs, pred, fit.residual_sum);
  return fit;
}

DecayFit fit_rate_law(const std::vector<std::pair<double, double>>& points) {
  return fit_power_law(points, 2.0);
}

std::vector<double> evaluate_fit(const DecayFit& fit, const std::vector<double>& times) {
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    switch (fit.model) {
      case DecayModel::EarlyGrowth:
        out.push_back(1.0 - fit.prefactor_epsilon * std::exp(fit.rate_lambda * t));
        break;
      case DecayModel::Exponential:
        out.push_back(fit.plateau + fit.prefactor_epsilon * std::exp(-fit.rate_lambda * t));
        break;
      case DecayModel::Gaussian: {
        const double s = fit.rate_lambda * t;
        out.push_back(fit.plateau + fit.prefactor_epsilon * std::exp(-s * s));
        break;
      }
      case DecayModel::QuadraticRateLaw:
      case DecayModel::PowerLaw:
        out.push_back(fit.rate_lambda * std::pow(t, fit.exponent));
        break;
    }
  }
  return out;
}

}  // namespace echolab
