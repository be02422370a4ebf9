#pragma once

#include <iosfwd>
#include <string>

#include "aimsgp/mixture.hpp"
#include "aimsgp/sampler.hpp"
#include "aimsgp/testbed.hpp"

namespace aims {

// Exit codes shared by the command drivers and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;       // bad flags, config or input data
inline constexpr int kExitNotConverged = 3;  // ladder exhausted max_levels

// Configuration or input-data problem that maps to kExitUsage.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string dataset = "branin";      // branin | model2d | toy1d | file:<path>
  SamplerConfig sampler;
  std::string prior = "flat";          // flat | lognormal(mu,sigma)
  std::string weighting = "uniform";   // uniform | importance
  std::string denominator = "verbatim";  // model2d only: verbatim | cubic
  std::string out_dir = "out";
  std::string test_dataset;            // lhs:<n> | file:<path>; default lhs:100 for builtins
  int design_points = 0;               // 0 = dataset default
  bool rescale_inputs = true;          // file datasets only

  void validate() const;  // throws ConfigError
  Model2dDenominator denominator_form() const;
  MixtureWeighting weighting_kind() const;
};

// Flat key=value file; '#' starts a comment. Unknown keys are rejected.
RunConfig parse_config_file(const std::string& path);
// Same file format, layered on top of an existing config (later entries win).
void apply_config_file(RunConfig& config, const std::string& path);
// Applies one key=value assignment (also used for flag overrides).
void apply_config_entry(RunConfig& config, const std::string& key, const std::string& value,
                        const std::string& where);
// Round-trips a config to its key=value form (resolved-config artifact).
std::string render_config(const RunConfig& config);

// Artifact basenames inside the output directory.
inline constexpr const char* kSamplesFile = "samples.csv";
inline constexpr const char* kLevelsFile = "levels.csv";
inline constexpr const char* kSummaryFile = "summary.json";
inline constexpr const char* kTrainingFile = "training_data.csv";
inline constexpr const char* kResolvedConfigFile = "run_config.txt";
inline constexpr const char* kPredictionsFile = "predictions.csv";
inline constexpr const char* kResidualsFile = "residuals.csv";
inline constexpr const char* kDiagnoseReportFile = "diagnose_report.json";

// Runs the sampler on the configured dataset and writes samples.csv,
// levels.csv, summary.json, training_data.csv and run_config.txt into
// out_dir. Per-level progress goes to `log` as key=value lines. Returns
// kExitOk or kExitNotConverged; throws ConfigError on bad input.
int cmd_fit(const RunConfig& config, std::ostream& log);

// Loads fit artifacts from out_dir, rebuilds the mixture, predicts at the
// configured test points and writes predictions.csv. Prints mixture and
// lowest-objective-component RMSE when actuals are available.
int cmd_predict(const RunConfig& config, std::ostream& log);

// Turns predictions.csv into residuals.csv plus a small JSON report with
// band counts.
int cmd_diagnose(const RunConfig& config, std::ostream& log);

// fit + predict + diagnose with the dataset's demo defaults.
int cmd_demo(const RunConfig& config, std::ostream& log);

}  // namespace aims
