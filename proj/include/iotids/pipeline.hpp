#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "iotids/data.hpp"
#include "iotids/eval.hpp"
#include "iotids/model.hpp"
#include "iotids/report.hpp"
#include "iotids/select.hpp"

namespace iotids {

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kArtifactVersion = "1.0.0";

struct ModelEntry {
  std::string name;
  ModelSpec spec;
  std::vector<GridAxis> grid;            // empty: fixed hyperparameters
  std::optional<double> eval_subsample;  // stratified fraction of the test rows to score
};

struct PipelineConfig {
  std::string dataset;
  std::string label_column = "last";
  std::uint64_t seed = 42;
  double test_fraction = 0.2;
  bool split_stratified = true;
  std::optional<std::uint64_t> split_seed;  // defaults to `seed`
  ScalerKind scaling = ScalerKind::none;    // default for entries without their own
  std::size_t folds = 5;
  bool cv_stratified = true;
  SelectionMetric metric = SelectionMetric::accuracy;
  std::string output_dir = "results";
  bool use_grid = true;
  std::vector<ModelEntry> models;

  SplitSpec split_spec() const { return {test_fraction, split_seed.value_or(seed), split_stratified}; }
  std::uint64_t fold_seed() const;
  /// Seed injected into an entry's params when it does not set one.
  std::uint64_t model_seed(const std::string& name) const;
};

/// The five tuned models, each with its default search grid.
PipelineConfig default_pipeline_config();
std::vector<GridAxis> default_grid(ModelKind kind);

/// Throws ConfigError on schema violations, unknown keys or invalid
/// hyperparameters.
PipelineConfig pipeline_config_from_json(const Json& doc);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
Json to_json(const PipelineConfig& config);

/// Keeps only the named entries (matched by name, then by kind), in the
/// requested order. Unknown names throw ConfigError.
void select_models(PipelineConfig& config, const std::vector<std::string>& names);

struct ModelTimings {
  double tune_ms = 0.0;
  double fit_ms = 0.0;
  double predict_ms = 0.0;
};

struct ModelRun {
  std::string name;
  ModelKind kind = ModelKind::majority;
  ScalerKind scaling = ScalerKind::none;
  bool ok = false;
  std::string error;
  Json params;
  Json grid_search;  // null when fixed hyperparameters were used
  std::size_t evaluated_rows = 0;
  ConfusionMatrix confusion;
  MetricsReport metrics;
  std::optional<RocCurve> roc;
  ModelTimings timings;
};

struct DatasetSummary {
  std::string path;
  std::size_t rows = 0;
  std::size_t features = 0;
  std::array<std::size_t, 2> class_counts{0, 0};
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  std::array<std::size_t, 2> train_class_counts{0, 0};
  std::array<std::size_t, 2> test_class_counts{0, 0};
};

struct RunReport {
  Json config;
  DatasetSummary dataset;
  double load_ms = 0.0;
  std::vector<ModelRun> models;

  bool all_failed() const;
  ComparisonTable comparison() const;
};

Json to_json(const RunReport& report);
RunReport run_report_from_json(const Json& doc);

/// Load, split once, tune on the training partition, fit, evaluate on the
/// held-out partition. Per-model failures are recorded in the report; data
/// errors throw DataError. `workers` (0 = hardware concurrency) never
/// changes the results.
RunReport run_pipeline(const PipelineConfig& config, std::size_t workers = 1);

/// Variant of run_pipeline for an already loaded table.
RunReport run_pipeline(const PipelineConfig& config, const DataTable& table, std::size_t workers = 1);

/// Writes report.json, comparison.txt and per-model confusion CSV, ROC CSV
/// and ROC SVG files.
void write_run_outputs(const RunReport& report, const std::filesystem::path& dir);

/// Grid search only, on the training partition. Returns one record per
/// model entry that has a grid.
Json run_grid_search(const PipelineConfig& config, std::size_t workers = 1);

/// Fits every entry on the whole table (grid search first when enabled).
std::vector<std::pair<std::string, TrainedModel>> train_models(const PipelineConfig& config, const DataTable& table,
                                                               std::size_t workers = 1);

/// Scores a table with a fitted model; the ROC curve is present only when
/// both classes occur.
ModelRun evaluate_model(const TrainedModel& model, const DataTable& table, const std::string& name,
                        std::size_t workers = 1);

Json model_run_to_json(const ModelRun& run);

/// Drops every "timings_ms" member, recursively.
Json strip_timings(Json doc);

std::string safe_file_stem(const std::string& name);

}  // namespace iotids
