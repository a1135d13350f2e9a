#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "echolab/analysis.hpp"
#include "echolab/correlators.hpp"
#include "echolab/iho.hpp"
#include "echolab/models.hpp"

namespace echolab {

enum class ExperimentKind { RmtOtocLe, Iho, Syk, HaarCheck, FiniteTemp };
// Inverse temperature used for the echo side: beta/2 (derived default) or bare beta.
enum class LeTemperature { Half, Bare };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

inline constexpr const char* kOutputDirEnv = "ECHOLAB_OUTPUT_DIR";

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::RmtOtocLe;

  double t_max = 3.0;
  int n_points = 200;
  bool scale_with_g = false;

  // Bipartite random-matrix and finite-temperature runs; beta is shared with SYK.
  int d_a = 2;
  int d_b = 128;
  double delta = 0.1;
  double beta = 0.0;
  NoiseChannels noise_channels = NoiseChannels::Traceless;
  LeTemperature le_temperature = LeTemperature::Half;
  Regularization regularization = Regularization::ThermalCircle;
  int noise_pairs = 0;  // > 0 adds a noise-averaged echo curve

  int n_fermions = 10;
  double g = 1.0;
  int probe_a = 0;
  int probe_b = 1;
  double variance_scale = 1.0;

  IhoParams iho;

  std::vector<long long> haar_samples{1000, 10000, 100000};
  int haar_operators = 10;

  FitOptions fit;
  // Model used for the (value, lambda) table of a sweep: auto, exponential or gaussian.
  std::string sweep_model = "auto";

  int realizations = 20;
  std::uint64_t seed = 1;
  std::uint64_t stream_offset = 0;
  int threads = 1;
  std::string output_dir;

  void validate() const;
  // Uniform grid on [0, t_max], or [0, t_max / g^2] when scale_with_g is set.
  TimeGrid grid() const;
  // Everything that influences results (threads and output_dir excluded).
  nlohmann::json to_json() const;
  // Stable short hash of to_json(), used in file names.
  std::string hash() const;
};

// Parses a key = value file with [sections]; unknown keys are rejected.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig load_config_string(const std::string& text);

// Applies one textual override by its config key (e.g. "model.delta" or "delta").
void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value);

// Resolution order: explicit value, config file, environment, "results".
std::string default_output_dir();

}  // namespace echolab
