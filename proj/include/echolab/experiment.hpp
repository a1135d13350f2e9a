#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "echolab/analysis.hpp"
#include "echolab/config.hpp"
#include "echolab/correlators.hpp"

namespace echolab {

inline constexpr int kManifestSchemaVersion = 1;

std::string code_version();

struct FitRecord {
  std::string curve;
  std::string requested;  // auto, exponential, gaussian, early_growth
  bool complemented = false;  // fit ran on 1 - (stored column)
  bool ok = false;
  DecayFit fit;
  std::string error;
};

struct ExperimentResult {
  std::vector<DecayCurve> curves;
  std::vector<FitRecord> fits;
  nlohmann::json extra = nlohmann::json::object();

  const DecayCurve& curve(const std::string& label) const;
  const FitRecord& fit(const std::string& curve, const std::string& requested) const;
};

struct ResultManifest {
  ExperimentConfig config;
  ExperimentResult result;
  std::string started_at;
  double wall_clock_seconds = 0.0;
  std::string output_dir;
  std::vector<std::string> curve_files;  // parallel to result.curves
  std::string manifest_file;
  nlohmann::json sweep;  // populated by sweep()

  nlohmann::json to_json() const;
};

// Pure computation, no files.
ExperimentResult compute_experiment(const ExperimentConfig& config);

// compute_experiment plus one CSV per curve and a JSON manifest.
ResultManifest run_experiment(const ExperimentConfig& config);

// One sub-run per value; value i uses stream offset base + i * 2^32.
ResultManifest sweep(const ExperimentConfig& config, const std::string& parameter,
                     const std::vector<double>& values);

inline constexpr std::uint64_t kSweepStreamStride = std::uint64_t{1} << 32;

// Fit attached to the primary curve of an experiment, as used by sweep tables.
FitRecord primary_fit(const ExperimentConfig& config, const ExperimentResult& result);

void write_curve_csv(const DecayCurve& curve, const std::string& path);
DecayCurve read_curve_csv(const std::string& path);

nlohmann::json fit_to_json(const DecayFit& fit);
FitRecord run_fit(const DecayCurve& curve, const std::string& requested, const FitOptions& options);

}  // namespace echolab
