#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "iotids/data.hpp"
#include "iotids/ensemble.hpp"
#include "iotids/knn.hpp"
#include "iotids/tree.hpp"

namespace iotids {

/// Key order is preserved so grids keep their declaration order and
/// reports read in a stable, logical order.
using Json = nlohmann::ordered_json;

enum class ModelKind { random_forest, decision_tree, knn, gradient_boosting, adaboost, majority };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);
bool uses_seed(ModelKind kind);

/// Predicts the training majority (ties to class 0) and scores every row
/// with the training class frequencies.
class MajorityModel {
 public:
  MajorityModel() = default;
  MajorityModel(std::array<double, 2> prior, std::size_t n_features);

  std::array<double, 2> predict_score(std::span<const double> row) const;
  Label predict(std::span<const double> row) const;
  const std::array<double, 2>& prior() const { return prior_; }
  std::size_t n_features() const { return n_features_; }

 private:
  std::array<double, 2> prior_{0.5, 0.5};
  std::size_t n_features_ = 0;
};

MajorityModel fit_majority(const DataTable& table);

using Classifier =
    std::variant<DecisionTreeModel, ForestModel, GradientBoostModel, AdaBoostModel, KnnModel, MajorityModel>;

/// What to train: a model kind, its hyperparameters (missing keys take the
/// tuned defaults) and the feature scaling fitted on the training rows.
struct ModelSpec {
  ModelKind kind = ModelKind::decision_tree;
  Json params = Json::object();
  ScalerKind scaling = ScalerKind::none;
};

/// Tuned hyperparameters for each kind.
Json default_params(ModelKind kind);

/// Defaults merged with `params`, validated and normalized. Unknown keys
/// and out-of-range values throw ConfigError.
Json resolve_params(ModelKind kind, const Json& params);

TreeConfig tree_config_from_params(const Json& resolved);
ForestConfig forest_config_from_params(const Json& resolved);
GradientBoostConfig gradient_boost_config_from_params(const Json& resolved);
AdaBoostConfig adaboost_config_from_params(const Json& resolved);
KnnConfig knn_config_from_params(const Json& resolved);

struct Predictions {
  std::vector<Label> labels;
  std::vector<double> scores;  // class-1 score per row
};

/// A fitted classifier together with the scaler it was trained behind.
class TrainedModel {
 public:
  TrainedModel(ModelKind kind, Json params, ScalerParams scaler, Classifier classifier,
               std::vector<std::string> feature_names);

  std::array<double, 2> predict_score(std::span<const double> row) const;
  Label predict(std::span<const double> row) const;

  /// Scores every row of `table` on up to `workers` threads.
  Predictions predict_table(const DataTable& table, std::size_t workers = 1) const;

  ModelKind kind() const { return kind_; }
  const Json& params() const { return params_; }
  const ScalerParams& scaler() const { return scaler_; }
  const Classifier& classifier() const { return classifier_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  std::size_t n_features() const { return feature_names_.size(); }

 private:
  ModelKind kind_;
  Json params_;
  ScalerParams scaler_;
  Classifier classifier_;
  std::vector<std::string> feature_names_;
};

/// Fits the scaler and classifier on `train`. `workers` parallelizes forest
/// members only; results do not depend on it.
TrainedModel fit_model(const ModelSpec& spec, const DataTable& train, std::size_t workers = 1);

}  // namespace iotids
