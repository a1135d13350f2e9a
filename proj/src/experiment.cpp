#include "echolab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "echolab/error.hpp"
#include "echolab/parallel.hpp"

#ifndef ECHOLAB_VERSION
#define ECHOLAB_VERSION "0.0.0-dev"
#endif

namespace echolab {

using nlohmann::json;

std::string code_version() { return ECHOLAB_VERSION; }

const DecayCurve& ExperimentResult::curve(const std::string& label) const {
  for (const auto& c : curves)
    if (c.label == label) return c;
  throw InvalidArgument("ExperimentResult: no curve labelled '" + label + "'");
}

const FitRecord& ExperimentResult::fit(const std::string& curve,
                                       const std::string& requested) const {
  for (const auto& f : fits)
    if (f.curve == curve && f.requested == requested) return f;
  throw InvalidArgument("ExperimentResult: no " + requested + " fit on '" + curve + "'");
}

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Rethrows the failure of realization i with its index, keeping the error class.
[[noreturn]] void rethrow_indexed(const std::string& what, std::size_t i, std::exception_ptr p) {
  const std::string prefix = what + " " + std::to_string(i) + ": ";
  try {
    std::rethrow_exception(p);
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(prefix + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(prefix + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(prefix + e.what());
  }
}

template <typename Fn>
void for_each_realization(const ExperimentConfig& c, std::size_t count, Fn&& fn,
                          const char* what = "realization") {
  parallel_for(count, c.threads, fn,
               [what](std::size_t i, std::exception_ptr p) { rethrow_indexed(what, i, p); });
}

DecayCurve relabel(DecayCurve c, const std::string& label) {
  c.label = label;
  return c;
}

double le_beta(const ExperimentConfig& c) {
  return c.le_temperature == LeTemperature::Half ? 0.5 * c.beta : c.beta;
}

void add_fits(ExperimentResult& r, const DecayCurve& curve, const std::string& stored_label,
              bool complemented, const std::vector<std::string>& kinds, const FitOptions& opt) {
  for (const auto& k : kinds) {
    FitRecord f = run_fit(curve, k, opt);
    f.curve = stored_label;
    f.complemented = complemented;
    r.fits.push_back(std::move(f));
  }
}

const std::vector<std::string> kDecayFits{"auto", "exponential", "gaussian"};

ExperimentResult run_rmt(const ExperimentConfig& c) {
  const TimeGrid grid = c.grid();
  const std::size_t n = static_cast<std::size_t>(c.realizations);
  std::vector<DecayCurve> otocs(n), les(n), averaged(c.noise_pairs > 0 ? n : 0);
  for_each_realization(c, n, [&](std::size_t r) {
    RngStream rng(c.seed, c.stream_offset + r);
    const BipartiteModel model = build_bipartite(c.d_b, c.delta, rng);
    const HermitianOperator a = sample_random_hermitian(c.d_a, rng);
    const HermitianOperator b = sample_random_hermitian(c.d_b, rng);
    const EigenDecomposition hdec = eig_hermitian(model.h_total);
    OtocOptions opt;
    opt.regularization = c.regularization;
    opt.normalize = true;
    if (c.regularization == Regularization::PureState)
      throw InvalidArgument("rmt_otoc_le: pure-state regularization needs an explicit state");
    otocs[r] = otoc_regularized(hdec, embed(a.matrix(), model.part, Subsystem::A),
                                embed(b.matrix(), model.part, Subsystem::B), c.beta, grid, opt);
    const EchoNoiseModel noise = echo_noise_model(model, c.noise_channels);
    les[r] = coarse_grained_le(noise.h_b, noise.couplings, c.delta, le_beta(c), grid, rng);
    if (c.noise_pairs > 0)
      averaged[r] =
          noise_averaged_le(noise.h_b, noise.couplings, c.delta, le_beta(c), grid, c.noise_pairs, rng);
  });
  ExperimentResult res;
  res.curves.push_back(average_curves(otocs, "otoc"));
  res.curves.push_back(average_curves(les, "le"));
  if (c.noise_pairs > 0) res.curves.push_back(average_curves(averaged, "le_noise_avg"));
  for (const auto& curve : res.curves) add_fits(res, curve, curve.label, false, kDecayFits, c.fit);
  res.extra["le_beta"] = le_beta(c);
  return res;
}

ExperimentResult run_finite_temp(const ExperimentConfig& c) {
  const TimeGrid grid = c.grid();
  const std::size_t n = static_cast<std::size_t>(c.realizations);
  std::vector<DecayCurve> otocs(n), les(n);
  std::vector<double> prefactor(n), raw0(n);
  for_each_realization(c, n, [&](std::size_t r) {
    RngStream rng(c.seed, c.stream_offset + r);
    const BipartiteModel model = build_bipartite(c.d_b, c.delta, rng);
    const EigenDecomposition hdec = eig_hermitian(model.h_total);
    otocs[r] = otoc_haar_average(hdec, model.part, c.beta, grid, true);
    raw0[r] = otocs[r].normalization;
    const EchoNoiseModel noise = echo_noise_model(model, c.noise_channels);
    les[r] = noise_averaged_le_exhaustive(noise.h_b, noise.couplings, c.delta, le_beta(c), grid);
    prefactor[r] = le_thermal_prefactor(eig_hermitian(noise.h_b), c.beta);
  });
  ExperimentResult res;
  res.curves.push_back(average_curves(otocs, "otoc_haar"));
  res.curves.push_back(relabel(average_curves(les, "le_noise_avg"), "le_noise_avg"));
  for (const auto& curve : res.curves) add_fits(res, curve, curve.label, false, {"auto"}, c.fit);
  double p = 0.0, o = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    p += prefactor[r] / static_cast<double>(n);
    o += raw0[r] / static_cast<double>(n);
  }
  res.extra["le_beta"] = le_beta(c);
  res.extra["le_prefactor_mean"] = p;
  res.extra["otoc_haar_t0_mean"] = o;
  return res;
}

ExperimentResult run_syk(const ExperimentConfig& c) {
  const TimeGrid grid = c.grid();
  const std::size_t n = static_cast<std::size_t>(c.realizations);
  std::vector<DecayCurve> otocs(n);
  std::vector<double> widths(n);
  for_each_realization(c, n, [&](std::size_t r) {
    RngStream rng(c.seed, c.stream_offset + r);
    const SykModel model =
        build_syk(c.n_fermions, c.variance_scale, c.g, {c.probe_a, c.probe_b}, rng);
    const SykSpectrum spec = diagonalize(model);
    widths[r] = spectral_width(spec.all_energies());
    otocs[r] = syk_otoc(model, spec, c.beta, grid, true);
  });
  ExperimentResult res;
  res.curves.push_back(average_curves(otocs, "otoc"));
  add_fits(res, res.curves.front(), "otoc", false, kDecayFits, c.fit);
  double mean = 0.0;
  for (double w : widths) mean += w / static_cast<double>(n);
  double ss = 0.0;
  for (double w : widths) ss += (w - mean) * (w - mean);
  res.extra["spectral_width_mean"] = mean;
  res.extra["spectral_width_stderr"] =
      n > 1 ? std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
  return res;
}

ExperimentResult run_iho(const ExperimentConfig& c) {
  const TimeGrid grid = c.grid();
  const DecayCurve otoc = iho_otoc(c.iho, grid);
  const IhoEcho echo = iho_le_exact(c.iho, grid);
  const BchResult bch = iho_le_bch(c.iho, grid);
  ExperimentResult res;
  res.curves.push_back(relabel(otoc.complement(), "one_minus_otoc"));
  res.curves.push_back(relabel(echo.m1.complement(), "one_minus_m1"));
  res.curves.push_back(relabel(bch.m1.complement(), "bch_reference"));
  add_fits(res, otoc, "one_minus_otoc", true, {"early_growth"}, c.fit);
  add_fits(res, echo.m1, "one_minus_m1", true, {"early_growth"}, c.fit);
  const NormalModeData nm = normal_modes(c.iho);
  res.extra["normal_modes"] = {{"eta", nm.eta},           {"xi", nm.xi},
                               {"d", nm.d},               {"mass1", nm.mass1},
                               {"mass2", nm.mass2},       {"stiffness1", nm.stiffness1},
                               {"stiffness2", nm.stiffness2}, {"cross_term", nm.cross_term}};
  res.extra["c1_sq"] = c.iho.c1_sq();
  res.extra["c2_sq"] = c.iho.c2_sq();
  return res;
}

// Random operator for the Haar check: complex Ginibre entries.
ComplexMatrix ginibre(Index d, RngStream& rng) {
  ComplexMatrix m(d, d);
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < d; ++i) m(i, j) = Complex(rng.normal(), rng.normal());
  return m;
}

ExperimentResult run_haar_check(const ExperimentConfig& c) {
  const BipartitePartition part(c.d_a, c.d_b);
  const std::vector<long long>& checkpoints = c.haar_samples;
  const long long n_max = checkpoints.back();
  const std::size_t n_ops = static_cast<std::size_t>(c.haar_operators);
  const std::size_t n_cp = checkpoints.size();
  // Per operator and checkpoint: max entry error and Frobenius error.
  std::vector<std::vector<double>> max_err(n_ops, std::vector<double>(n_cp));
  std::vector<std::vector<double>> fro_err(n_ops, std::vector<double>(n_cp));
  for_each_realization(
      c, n_ops,
      [&](std::size_t k) {
        RngStream rng(c.seed, c.stream_offset + k);
        const ComplexMatrix o = ginibre(part.dim(), rng);
        const ComplexMatrix exact = haar_average_conjugation(o, part, Subsystem::A);
        const ComplexMatrix id_b = ComplexMatrix::Identity(c.d_b, c.d_b);
        ComplexMatrix sum = ComplexMatrix::Zero(part.dim(), part.dim());
        std::size_t next = 0;
        for (long long s = 1; s <= n_max; ++s) {
          const ComplexMatrix u = kron(sample_haar_unitary(c.d_a, rng), id_b);
          sum.noalias() += u.adjoint() * o * u;
          if (s == checkpoints[next]) {
            const ComplexMatrix diff = sum / static_cast<double>(s) - exact;
            max_err[k][next] = diff.cwiseAbs().maxCoeff();
            fro_err[k][next] = diff.norm();
            ++next;
          }
        }
      },
      "operator");
  std::vector<double> ns, mean_max(n_cp), se_max(n_cp), mean_fro(n_cp), worst(n_cp, 0.0);
  const double m = static_cast<double>(n_ops);
  for (std::size_t j = 0; j < n_cp; ++j) {
    ns.push_back(static_cast<double>(checkpoints[j]));
    for (std::size_t k = 0; k < n_ops; ++k) {
      mean_max[j] += max_err[k][j] / m;
      mean_fro[j] += fro_err[k][j] / m;
      worst[j] = std::max(worst[j], max_err[k][j]);
    }
    double ss = 0.0;
    for (std::size_t k = 0; k < n_ops; ++k)
      ss += (max_err[k][j] - mean_max[j]) * (max_err[k][j] - mean_max[j]);
    se_max[j] = n_ops > 1 ? std::sqrt(ss / (m - 1.0) / m) : 0.0;
  }
  DecayCurve conv;
  conv.grid = TimeGrid(ns, true);
  conv.mean = mean_max;
  conv.raw_mean = mean_max;
  conv.std_error = se_max;
  conv.n_realizations = static_cast<int>(n_ops);
  conv.label = "convergence";
  ExperimentResult res;
  res.curves.push_back(conv);
  // Least-squares slope of log error against log N.
  double slope = 0.0, intercept = 0.0;
  if (n_cp >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t j = 0; j < n_cp; ++j) {
      const double x = std::log(ns[j]), y = std::log(mean_fro[j]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double k = static_cast<double>(n_cp);
    slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    intercept = (sy - slope * sx) / k;
  }
  res.extra["averaged_over"] = "A";
  res.extra["operator_ensemble"] = "complex Ginibre";
  res.extra["samples"] = checkpoints;
  res.extra["mean_max_entry_error"] = mean_max;
  res.extra["worst_max_entry_error"] = worst;
  res.extra["mean_frobenius_error"] = mean_fro;
  res.extra["loglog_slope"] = slope;
  res.extra["loglog_intercept"] = intercept;
  return res;
}

json options_to_json(const FitOptions& o) {
  json j;
  if (o.window)
    j["window"] = {o.window->t_lo, o.window->t_hi};
  else
    j["window"] = nullptr;
  j["amplitude_hi"] = o.amplitude_hi;
  j["amplitude_lo"] = o.amplitude_lo;
  j["growth_lo"] = o.growth_lo;
  j["growth_hi"] = o.growth_hi;
  j["subtract_plateau"] = o.subtract_plateau;
  j["use_weights"] = o.use_weights;
  return j;
}

std::string resolve_output_dir(const ExperimentConfig& c) {
  return c.output_dir.empty() ? default_output_dir() : c.output_dir;
}

std::string fnv_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace

FitRecord run_fit(const DecayCurve& curve, const std::string& requested, const FitOptions& options) {
  using FitFn = DecayFit (*)(const DecayCurve&, const FitOptions&);
  FitFn fn = nullptr;
  if (requested == "auto") fn = model_select;
  else if (requested == "exponential") fn = fit_exponential;
  else if (requested == "gaussian") fn = fit_gaussian;
  else if (requested == "early_growth") fn = fit_early_growth;
  else
    throw InvalidArgument("unknown fit model '" + requested +
                          "' (auto, exponential, gaussian, early_growth)");
  FitRecord rec;
  rec.curve = curve.label;
  rec.requested = requested;
  // A rejected fit is recorded, not fatal: the curves are still worth keeping.
  try {
    rec.fit = fn(curve, options);
    rec.ok = true;
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  return rec;
}

json fit_to_json(const DecayFit& f) {
  json j;
  j["model"] = to_string(f.model);
  j["rate_lambda"] = f.rate_lambda;
  j["prefactor_epsilon"] = f.prefactor_epsilon;
  j["plateau"] = f.plateau;
  j["window"] = {f.window.t_lo, f.window.t_hi};
  j["r_squared"] = f.r_squared;
  j["residual_sum"] = f.residual_sum;
  j["n_points"] = f.n_points;
  j["weighted"] = f.weighted;
  j["ambiguous"] = f.ambiguous;
  if (f.model == DecayModel::EarlyGrowth) j["scrambling_time"] = f.scrambling_time;
  if (f.model == DecayModel::PowerLaw || f.model == DecayModel::QuadraticRateLaw)
    j["exponent"] = f.exponent;
  return j;
}

ExperimentResult compute_experiment(const ExperimentConfig& config) {
  config.validate();
  switch (config.experiment) {
    case ExperimentKind::RmtOtocLe: return run_rmt(config);
    case ExperimentKind::FiniteTemp: return run_finite_temp(config);
    case ExperimentKind::Syk: return run_syk(config);
    case ExperimentKind::Iho: return run_iho(config);
    case ExperimentKind::HaarCheck: return run_haar_check(config);
  }
  throw InvalidArgument("unknown experiment kind");
}

json ResultManifest::to_json() const {
  json j;
  j["schema_version"] = kManifestSchemaVersion;
  j["code_version"] = code_version();
  j["experiment"] = echolab::to_string(config.experiment);
  j["config"] = config.to_json();
  j["config_hash"] = config.hash();
  j["rng"] = {{"algorithm", std::string(RngStream::kAlgorithm)},
              {"seed", config.seed},
              {"stream_offset", config.stream_offset}};
  j["started_at"] = started_at;
  j["wall_clock_seconds"] = wall_clock_seconds;
  j["curves"] = json::array();
  for (std::size_t i = 0; i < result.curves.size(); ++i) {
    const DecayCurve& c = result.curves[i];
    j["curves"].push_back({{"label", c.label},
                           {"file", i < curve_files.size() ? curve_files[i] : ""},
                           {"n_points", c.grid.size()},
                           {"n_realizations", c.n_realizations},
                           {"normalized", c.normalized},
                           {"normalization", c.normalization},
                           {"max_imag_residue", c.max_imag_residue}});
  }
  j["fits"] = json::array();
  for (const auto& f : result.fits) {
    json e{{"curve", f.curve},
           {"requested", f.requested},
           {"complemented", f.complemented},
           {"ok", f.ok},
           {"options", options_to_json(config.fit)}};
    if (f.ok)
      e["result"] = fit_to_json(f.fit);
    else
      e["error"] = f.error;
    j["fits"].push_back(std::move(e));
  }
  j["extra"] = result.extra;
  if (!sweep.is_null()) j["sweep"] = sweep;
  return j;
}

void write_curve_csv(const DecayCurve& curve, const std::string& path) {
  curve.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "t,mean,stderr,n\n";
  for (std::size_t i = 0; i < curve.grid.size(); ++i)
    out << format_double(curve.grid[i]) << ',' << format_double(curve.mean[i]) << ','
        << format_double(curve.std_error[i]) << ',' << curve.n_realizations << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

DecayCurve read_curve_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open CSV " + path);
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,mean,stderr,n")
    throw InvalidArgument(path + ": expected header 't,mean,stderr,n', got '" + line + "'");
  std::vector<double> t;
  DecayCurve c;
  int n = 1;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string f[4];
    for (auto& field : f)
      if (!std::getline(ss, field, ','))
        throw InvalidArgument(path + ": row " + std::to_string(row) + " has fewer than 4 fields");
    try {
      t.push_back(std::stod(f[0]));
      c.mean.push_back(std::stod(f[1]));
      c.std_error.push_back(std::stod(f[2]));
      n = std::stoi(f[3]);
    } catch (const std::exception&) {
      throw InvalidArgument(path + ": row " + std::to_string(row) + " is not numeric");
    }
  }
  c.grid = TimeGrid(std::move(t), true);
  c.raw_mean = c.mean;
  c.n_realizations = n;
  c.label = std::filesystem::path(path).stem().string();
  c.validate();
  return c;
}

ResultManifest run_experiment(const ExperimentConfig& config) {
  config.validate();
  ResultManifest m;
  m.config = config;
  m.started_at = utc_timestamp();
  const auto t0 = std::chrono::steady_clock::now();
  m.result = compute_experiment(config);
  m.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  m.output_dir = resolve_output_dir(config);
  std::filesystem::create_directories(m.output_dir);
  const std::string kind = to_string(config.experiment);
  const std::string hash = config.hash();
  for (const auto& c : m.result.curves) {
    const std::string file = kind + "_" + c.label + "_" + hash + ".csv";
    write_curve_csv(c, (std::filesystem::path(m.output_dir) / file).string());
    m.curve_files.push_back(file);
  }
  m.manifest_file = kind + "_manifest_" + hash + ".json";
  write_json(m.to_json(), (std::filesystem::path(m.output_dir) / m.manifest_file).string());
  return m;
}

FitRecord primary_fit(const ExperimentConfig& config, const ExperimentResult& result) {
  const std::string model = config.sweep_model;
  switch (config.experiment) {
    case ExperimentKind::RmtOtocLe:
    case ExperimentKind::Syk: return run_fit(result.curve("otoc"), model, config.fit);
    case ExperimentKind::FiniteTemp: return run_fit(result.curve("otoc_haar"), model, config.fit);
    case ExperimentKind::Iho: {
      FitRecord f = run_fit(result.curve("one_minus_otoc").complement(), "early_growth", config.fit);
      f.curve = "one_minus_otoc";
      f.complemented = true;
      return f;
    }
    case ExperimentKind::HaarCheck: break;
  }
  throw InvalidArgument("sweep: haar_check has no decay curve to fit");
}

ResultManifest sweep(const ExperimentConfig& config, const std::string& parameter,
                     const std::vector<double>& values) {
  static const std::vector<std::string> kSweepable{"delta", "beta", "g", "d_b", "n_fermions"};
  if (std::find(kSweepable.begin(), kSweepable.end(), parameter) == kSweepable.end())
    throw InvalidArgument("sweep: parameter '" + parameter +
                          "' is not sweepable (delta, beta, g, d_b, n_fermions)");
  if (values.empty()) throw InvalidArgument("sweep: no values");
  if (config.experiment == ExperimentKind::HaarCheck)
    throw InvalidArgument("sweep: haar_check has no decay curve to fit");
  // Reject bad values before any computation.
  std::vector<ExperimentConfig> runs;
  for (std::size_t i = 0; i < values.size(); ++i) {
    ExperimentConfig c = config;
    set_config_value(c, parameter, format_double(values[i]));
    c.stream_offset = config.stream_offset + static_cast<std::uint64_t>(i) * kSweepStreamStride;
    c.validate();
    runs.push_back(std::move(c));
  }
  config.validate();

  ResultManifest m;
  m.config = config;
  m.started_at = utc_timestamp();
  const auto t0 = std::chrono::steady_clock::now();
  json subruns = json::array();
  std::vector<std::pair<double, double>> table;
  std::ostringstream csv;
  csv << "value,lambda,epsilon,r_squared,model,ok\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const ResultManifest sub = run_experiment(runs[i]);
    const FitRecord f = primary_fit(runs[i], sub.result);
    json e{{"value", values[i]},
           {"stream_offset", runs[i].stream_offset},
           {"manifest", sub.manifest_file},
           {"fit_requested", f.requested},
           {"ok", f.ok}};
    if (f.ok) {
      e["fit"] = fit_to_json(f.fit);
      table.emplace_back(values[i], f.fit.rate_lambda);
    } else {
      e["error"] = f.error;
    }
    subruns.push_back(std::move(e));
    csv << format_double(values[i]) << ',' << format_double(f.ok ? f.fit.rate_lambda : NAN) << ','
        << format_double(f.ok ? f.fit.prefactor_epsilon : NAN) << ','
        << format_double(f.ok ? f.fit.r_squared : NAN) << ','
        << (f.ok ? to_string(f.fit.model) : std::string("failed")) << ',' << (f.ok ? 1 : 0)
        << '\n';
  }
  m.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  m.output_dir = resolve_output_dir(config);
  std::filesystem::create_directories(m.output_dir);

  json values_json = values;
  const std::string hash =
      fnv_hex(config.hash() + "|" + parameter + "|" + values_json.dump());
  const std::string kind = to_string(config.experiment);
  const std::string table_file = kind + "_sweep_" + parameter + "_" + hash + ".csv";
  {
    std::ofstream out(std::filesystem::path(m.output_dir) / table_file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + table_file);
    out << csv.str();
  }
  json rate_laws = json::object();
  for (const auto& [name, power] : {std::pair<const char*, double>{"quadratic", 2.0},
                                    std::pair<const char*, double>{"linear", 1.0}}) {
    try {
      rate_laws[name] = fit_to_json(fit_power_law(table, power));
    } catch (const std::exception& e) {
      rate_laws[name] = {{"error", e.what()}};
    }
  }
  m.sweep = {{"parameter", parameter},
             {"values", values},
             {"stream_stride", kSweepStreamStride},
             {"table_file", table_file},
             {"subruns", subruns},
             {"rate_law_fits", rate_laws}};
  m.manifest_file = kind + "_sweep_manifest_" + hash + ".json";
  write_json(m.to_json(), (std::filesystem::path(m.output_dir) / m.manifest_file).string());
  return m;
}

}  // namespace echolab
