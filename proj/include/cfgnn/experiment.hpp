#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cfgnn/checkpoint.hpp"
#include "cfgnn/data.hpp"
#include "cfgnn/metrics.hpp"
#include "cfgnn/model.hpp"

namespace cfgnn {

/// Where a command gets its dataset: CSV files, or the synthetic generator
/// when `features` is empty.
struct DataSource {
  std::filesystem::path features;
  std::optional<std::filesystem::path> edges;
  std::string label_column = "label";
};

/// One (variant, loss weighting) combination in an imbalance sweep.
struct SweepArm {
  Variant variant = Variant::base;
  ClassWeightMode class_weight_mode = ClassWeightMode::inverse_frequency;
};

/// CF-GNN with inverse-frequency weights against the unweighted global filter.
std::vector<SweepArm> default_sweep_arms();

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::filesystem::path out = ".";
  SyntheticConfig synthetic;
  TrainConfig train;
  SplitSpec split;
  DataSource data;
  std::optional<std::filesystem::path> checkpoint;
  std::vector<double> ratios = {0.1, 0.3, 0.5, 0.7, 0.9};
  std::vector<SweepArm> arms = default_sweep_arms();
  /// Extra run seeds for the sweep; empty means just `seed`.
  std::vector<std::uint64_t> sweep_seeds;

  /// Copies `seed` into the synthetic, training and split settings. Called
  /// after command-line overrides and before any command runs.
  void apply_seed(std::uint64_t s);
  void validate() const;
};

/// Parses a JSON config. Unknown keys are rejected; relative paths are
/// resolved against `base_dir`.
ExperimentConfig parse_config(const nlohmann::ordered_json& j, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Effective settings, as echoed into run manifests.
nlohmann::ordered_json config_json(const ExperimentConfig& config);

/// Hash git assigns to a blob with these contents (SHA-1, lowercase hex).
std::string git_blob_hash(std::string_view contents);

/// Loads the configured CSV dataset, or generates the synthetic one.
Dataset load_dataset(const ExperimentConfig& config);

struct TrainEvalResult {
  Model model;
  std::vector<EpochRecord> history;
  Split split;
  ConfusionMatrix confusion;
  MetricsReport report;
};

/// Min-max normalizes the features, splits, trains and scores the test split.
TrainEvalResult train_and_evaluate(const Dataset& ds, const TrainConfig& train, const SplitSpec& split);

/// Header `epoch,loss,cma,macro_f1`.
std::string history_csv(const std::vector<EpochRecord>& history);

struct SweepRow {
  Variant variant = Variant::base;
  ClassWeightMode class_weight_mode = ClassWeightMode::inverse_frequency;
  double ratio = 0.0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string status;  // "ok" or the reason the ratio was skipped
  double cma = 0.0;
  double g_mean = 0.0;
  double mcc = 0.0;
  double macro_f1 = 0.0;
};

/// For every seed, arm and ratio: resample, train, evaluate. Rows are
/// ordered seed-major, then arm, then ratio. Infeasible ratios yield a row
/// with ok == false instead of an exception.
std::vector<SweepRow> run_sweep(const Dataset& base, const ExperimentConfig& config);
std::string sweep_csv(const std::vector<SweepRow>& rows);

/// What a command produced, beyond its files.
struct CommandResult {
  std::vector<std::string> warnings;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
};

// Each command writes its outputs plus manifest.json into config.out.

/// features.csv, edges.csv
CommandResult cmd_generate(const ExperimentConfig& config);
/// checkpoint.json, history.csv
CommandResult cmd_train(const ExperimentConfig& config);
/// report.json, confusion.csv, scores.csv (class probabilities of the test
/// nodes). Needs config.checkpoint.
CommandResult cmd_evaluate(const ExperimentConfig& config);
/// sweep.csv
CommandResult cmd_sweep_ir(const ExperimentConfig& config);
/// eigenvalues.csv, eigenvectors.csv
CommandResult cmd_spectra(const ExperimentConfig& config);

}  // namespace cfgnn
