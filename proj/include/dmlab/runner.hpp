#pragma once

#include <cstdint>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "dmlab/calibration.hpp"

namespace dmlab {

enum class ExperimentKind {
  gaussianDM,
  cubeCounterexample,
  productUniform,
  productLogConcave,
  productHeavyTailed,
  eventAFrequency,
  processSandbox,
};

std::string to_string(ExperimentKind kind);

/// Raised for configs that fail validation; maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  ExperimentKind experimentKind = ExperimentKind::gaussianDM;
  nlohmann::json body;
  nlohmann::json ensembles = nlohmann::json::object();
  std::vector<long long> dimensionSchedule;
  nlohmann::json dRule;
  nlohmann::json mRule;
  long long trials = 0;
  std::uint64_t masterSeed = 0;
  nlohmann::json distortionMethod;
  nlohmann::json outputPaths = nlohmann::json::object();
  nlohmann::json constants = nlohmann::json::object();

  nlohmann::json raw;  // verbatim input, echoed into the summary
};

/// Parses and validates. Unknown fields (at any level) are rejected.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

struct TrialRecord {
  std::string experimentId;
  long long n = 0, d = 0, m = 0;
  std::uint64_t seed = 0;
  long long trialIndex = 0;
  double supEst = 0.0, infEst = 0.0, ratio = 0.0;
  double ellK = 0.0, dStar = 0.0;
  std::optional<bool> eventAHolds;
  std::optional<double> witnessRatio;
  std::optional<double> elapsedMs;
  std::string methodTags;
  std::string error;  // empty on success
};

struct RunOptions {
  int threads = 0;        // 0 keeps the OpenMP default
  std::string outDir;     // empty: do not write files
  bool recordTiming = false;
  Calibration calibration = default_calibration();
};

struct RunResult {
  std::vector<TrialRecord> records;
  std::string csv;
  nlohmann::json summary;
  std::size_t failures = 0;
};

RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

std::string csv_header();
std::string to_csv(const std::vector<TrialRecord>& records);
std::vector<TrialRecord> parse_csv(const std::string& text);

/// Recomputes the per-series medians and quartiles from CSV text and compares
/// them with the summary; throws ConfigError naming the first mismatch.
void verify_summary_against_csv(const nlohmann::json& summary, const std::string& csv);

enum class PlotKind { ratioVsN, ratioVsD, tailCurve };
PlotKind plot_kind_from_string(const std::string& name);

/// Delimited plot table (header + rows). Throws ConfigError naming a missing series.
std::string emit_plot_data(const nlohmann::json& summary, PlotKind kind);

/// Linear-interpolation quantile of a sample (sorted internally).
double quantile(std::vector<double> values, double q);

std::string format_double(double v);

}  // namespace dmlab
