#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "echolab/config.hpp"
#include "echolab/error.hpp"
#include "echolab/experiment.hpp"

namespace {

using namespace echolab;

struct Overrides {
  std::string config_path;
  std::optional<std::string> experiment;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
  std::optional<std::string> delta, beta, d_b, n_fermions, g, t_max, n_points, realizations;
  std::vector<std::string> set;  // free-form section.key=value
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "INI configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--experiment", o.experiment,
                  "rmt_otoc_le | iho | syk | haar_check | finite_temp");
  cmd->add_option("--seed", o.seed, "base RNG seed");
  cmd->add_option("--threads", o.threads, "worker threads");
  cmd->add_option("--out", o.out, std::string("output directory (default: $") + kOutputDirEnv +
                                      " or ./results)");
  cmd->add_option("--delta", o.delta, "coupling strength");
  cmd->add_option("--beta", o.beta, "inverse temperature");
  cmd->add_option("--d-b", o.d_b, "bath dimension");
  cmd->add_option("--n-fermions", o.n_fermions, "SYK fermion count");
  cmd->add_option("--g", o.g, "SYK probe-coupling deformation");
  cmd->add_option("--t-max", o.t_max, "last time point");
  cmd->add_option("--n-points", o.n_points, "time points");
  cmd->add_option("--realizations", o.realizations, "disorder realizations");
  cmd->add_option("--set", o.set, "extra override, e.g. --set fit.t_hi=2.5");
}

ExperimentConfig build_config(const Overrides& o, std::optional<std::string> forced_kind = {}) {
  ExperimentConfig c = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path);
  // The kind goes first because some aliases route by experiment.
  if (forced_kind) set_config_value(c, "kind", *forced_kind);
  if (o.experiment) set_config_value(c, "kind", *o.experiment);
  auto apply = [&c](const char* key, const std::optional<std::string>& v) {
    if (v) set_config_value(c, key, *v);
  };
  apply("delta", o.delta);
  apply("beta", o.beta);
  apply("d_b", o.d_b);
  apply("n_fermions", o.n_fermions);
  apply("g", o.g);
  apply("t_max", o.t_max);
  apply("n_points", o.n_points);
  apply("realizations", o.realizations);
  for (const auto& kv : o.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw InvalidArgument("--set expects key=value, got '" + kv + "'");
    set_config_value(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed) c.seed = *o.seed;
  if (o.threads) c.threads = *o.threads;
  if (o.out) c.output_dir = *o.out;
  c.validate();
  return c;
}

void report(const ResultManifest& m) {
  std::cout << "manifest: " << (std::filesystem::path(m.output_dir) / m.manifest_file).string()
            << '\n';
  for (std::size_t i = 0; i < m.curve_files.size(); ++i)
    std::cout << "curve " << m.result.curves[i].label << ": " << m.curve_files[i] << '\n';
  for (const auto& f : m.result.fits) {
    std::cout << "fit " << f.curve << " [" << f.requested << "]: ";
    if (f.ok)
      std::cout << to_string(f.fit.model) << " lambda=" << f.fit.rate_lambda
                << " r2=" << f.fit.r_squared << '\n';
    else
      std::cout << "rejected (" << f.error << ")\n";
  }
  if (!m.result.extra.empty()) std::cout << "extra: " << m.result.extra.dump() << '\n';
  std::printf("wall clock: %.3f s\n", m.wall_clock_seconds);
}

int run_main(int argc, char** argv) {
  CLI::App app{"echolab: OTOC and Loschmidt-echo numerics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", code_version());

  Overrides run_o, sweep_o, haar_o;
  auto* run = app.add_subcommand("run", "run one experiment and write CSVs plus a manifest");
  add_common(run, run_o);

  auto* sw = app.add_subcommand("sweep", "one run per parameter value plus a rate table");
  add_common(sw, sweep_o);
  std::string param;
  std::vector<double> values;
  sw->add_option("--param", param, "delta | beta | g | d_b | n_fermions")->required();
  sw->add_option("--values", values, "values, comma separated")->required()->delimiter(',');

  auto* haar = app.add_subcommand("haar-check", "Monte Carlo check of the Haar average formula");
  add_common(haar, haar_o);
  std::optional<std::string> d_a, samples, operators;
  haar->add_option("--d-a", d_a, "subsystem A dimension");
  haar->add_option("--samples", samples, "checkpoint sample counts, comma separated");
  haar->add_option("--operators", operators, "random operators");

  auto* fit = app.add_subcommand("fit", "re-fit existing curve CSVs, JSON to stdout");
  std::vector<std::string> files;
  std::string model = "auto";
  bool complement = false, no_weights = false, keep_plateau = false;
  std::optional<double> t_lo, t_hi;
  fit->add_option("files", files, "curve CSVs")->required()->check(CLI::ExistingFile);
  fit->add_option("--model", model, "auto | exponential | gaussian | early_growth");
  fit->add_flag("--complement", complement, "fit 1 - mean (for 1-F and 1-M1 files)");
  fit->add_option("--t-lo", t_lo, "explicit window start");
  fit->add_option("--t-hi", t_hi, "explicit window end");
  fit->add_flag("--no-weights", no_weights, "ignore the stderr column");
  fit->add_flag("--keep-plateau", keep_plateau, "do not subtract the late-time plateau");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*run) {
    report(run_experiment(build_config(run_o)));
  } else if (*sw) {
    const ResultManifest m = sweep(build_config(sweep_o), param, values);
    std::cout << "manifest: " << (std::filesystem::path(m.output_dir) / m.manifest_file).string()
              << '\n'
              << "table: " << m.sweep["table_file"].get<std::string>() << '\n'
              << "rate laws: " << m.sweep["rate_law_fits"].dump() << '\n';
  } else if (*haar) {
    ExperimentConfig c = build_config(haar_o, std::string("haar_check"));
    if (d_a) set_config_value(c, "d_a", *d_a);
    if (samples) set_config_value(c, "haar_check.samples", *samples);
    if (operators) set_config_value(c, "haar_check.operators", *operators);
    c.validate();
    report(run_experiment(c));
  } else if (*fit) {
    FitOptions opt;
    if (t_lo || t_hi) {
      if (!(t_lo && t_hi)) throw InvalidArgument("--t-lo and --t-hi go together");
      opt.window = FitWindow{*t_lo, *t_hi};
    }
    opt.use_weights = !no_weights;
    opt.subtract_plateau = !keep_plateau;
    nlohmann::json out = nlohmann::json::array();
    for (const auto& f : files) {
      DecayCurve c = read_curve_csv(f);
      if (complement) c = c.complement();
      const FitRecord r = run_fit(c, model, opt);
      nlohmann::json e{{"file", f}, {"requested", model}, {"complemented", complement},
                       {"ok", r.ok}};
      if (r.ok)
        e["result"] = fit_to_json(r.fit);
      else
        e["error"] = r.error;
      out.push_back(std::move(e));
    }
    std::cout << out.dump(2) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_main(argc, argv);
  } catch (const echolab::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const echolab::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 1;
  }
}
