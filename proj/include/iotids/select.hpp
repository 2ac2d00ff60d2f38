#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "iotids/data.hpp"
#include "iotids/model.hpp"

namespace iotids {

/// Assignment of every row to one of n_folds validation folds.
struct FoldPlan {
  std::size_t n_folds = 5;
  std::uint64_t seed = 0;
  bool stratified = true;
  std::vector<std::size_t> assignments;

  std::vector<std::size_t> validation_rows(std::size_t fold) const;
  std::vector<std::size_t> training_rows(std::size_t fold) const;
};

/// Seeded shuffle then round-robin assignment. Stratified plans shuffle
/// each class separately and continue the round-robin across classes, so
/// fold sizes differ by at most one both per class and overall.
FoldPlan make_folds(const DataTable& table, std::size_t n_folds, std::uint64_t seed, bool stratified = true);

enum class SelectionMetric { accuracy, f1 };

std::string to_string(SelectionMetric metric);
SelectionMetric selection_metric_from_string(const std::string& name);

struct CvResult {
  std::vector<double> fold_scores;
  double mean = 0.0;
};

/// Trains on every fold's complement and scores on the fold. Fit errors
/// propagate. Folds run on up to `workers` threads.
CvResult cross_validate(const DataTable& table, const ModelSpec& spec, const FoldPlan& plan,
                        SelectionMetric metric = SelectionMetric::accuracy, std::size_t workers = 1);

struct GridAxis {
  std::string name;
  std::vector<Json> values;
};

/// Base spec plus named axes. Combinations are enumerated with the first
/// declared axis varying slowest.
struct ParamGrid {
  ModelSpec base;
  std::vector<GridAxis> axes;

  std::size_t size() const;
  /// Parameters of the i-th combination: base params overlaid with one
  /// value per axis.
  Json combination(std::size_t i) const;
};

struct GridCell {
  Json params;
  std::vector<double> fold_scores;
  double mean = 0.0;
  std::optional<std::string> error;
};

struct GridSearchResult {
  std::vector<GridCell> cells;
  std::size_t best_index = 0;
  Json best_params;
  double best_mean = 0.0;
  std::optional<TrainedModel> best_model;
};

/// Cross-validates every combination. The winner has the highest mean
/// score, ties going to the earliest combination, and is refit on the
/// whole table. Failing combinations are recorded and skipped; if all of
/// them fail a FitError is thrown.
GridSearchResult grid_search(const DataTable& table, const ParamGrid& grid, const FoldPlan& plan,
                             SelectionMetric metric = SelectionMetric::accuracy, std::size_t workers = 1);

}  // namespace iotids
