#include "iotids/model.hpp"

#include <cmath>
#include <type_traits>

#include <fmt/format.h>

#include "iotids/error.hpp"
#include "iotids/parallel.hpp"

namespace iotids {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::random_forest: return "random_forest";
    case ModelKind::decision_tree: return "decision_tree";
    case ModelKind::knn: return "knn";
    case ModelKind::gradient_boosting: return "gradient_boosting";
    case ModelKind::adaboost: return "adaboost";
    case ModelKind::majority: return "majority";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
  for (ModelKind k : {ModelKind::random_forest, ModelKind::decision_tree, ModelKind::knn,
                      ModelKind::gradient_boosting, ModelKind::adaboost, ModelKind::majority}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError(fmt::format("unknown model kind '{}'", name));
}

bool uses_seed(ModelKind kind) {
  return kind == ModelKind::random_forest || kind == ModelKind::decision_tree ||
         kind == ModelKind::gradient_boosting || kind == ModelKind::adaboost;
}

// ---------------------------------------------------------------------------
// MajorityModel

MajorityModel::MajorityModel(std::array<double, 2> prior, std::size_t n_features)
    : prior_(prior), n_features_(n_features) {}

std::array<double, 2> MajorityModel::predict_score(std::span<const double> row) const {
  if (row.size() != n_features_) {
    throw std::invalid_argument(fmt::format("row has {} features, model expects {}", row.size(), n_features_));
  }
  return prior_;
}

Label MajorityModel::predict(std::span<const double> row) const {
  const auto s = predict_score(row);
  return s[1] > s[0] ? 1 : 0;
}

MajorityModel fit_majority(const DataTable& table) {
  if (table.empty()) throw FitError("majority: empty training table");
  const auto counts = table.class_counts();
  const auto n = static_cast<double>(table.rows());
  return MajorityModel({static_cast<double>(counts[0]) / n, static_cast<double>(counts[1]) / n}, table.cols());
}

// ---------------------------------------------------------------------------
// Hyperparameters

Json default_params(ModelKind kind) {
  switch (kind) {
    case ModelKind::random_forest:
      return {{"criterion", "gini"},  {"max_depth", 8},        {"max_features", "sqrt"}, {"n_estimators", 200},
              {"min_samples_split", 2}, {"min_samples_leaf", 1}, {"bootstrap", true},     {"seed", 0}};
    case ModelKind::decision_tree:
      return {{"criterion", "entropy"},  {"max_depth", 30},         {"min_samples_leaf", 5},
              {"min_samples_split", 10}, {"max_features", "sqrt"}, {"seed", 0}};
    case ModelKind::knn:
      return {{"n_neighbors", 5}, {"weights", "distance"}, {"metric", "manhattan"}, {"p", 1}};
    case ModelKind::gradient_boosting:
      return {{"learning_rate", 0.01}, {"max_depth", 4}, {"n_estimators", 500}, {"subsample", 0.8}, {"seed", 0}};
    case ModelKind::adaboost:
      return {{"algorithm", "SAMME.R"}, {"learning_rate", 0.1}, {"n_estimators", 100}, {"base_depth", 1},
              {"seed", 0}};
    case ModelKind::majority:
      return Json::object();
  }
  return Json::object();
}

namespace {

const Json& field(const Json& params, const char* key) {
  auto it = params.find(key);
  if (it == params.end()) throw ConfigError(fmt::format("missing parameter '{}'", key));
  return *it;
}

std::size_t get_count(const Json& params, const char* key) {
  const Json& v = field(params, key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    throw ConfigError(fmt::format("parameter '{}' must be a non-negative integer, got {}", key, v.dump()));
  }
  return v.get<std::size_t>();
}

std::uint64_t get_seed(const Json& params) {
  const Json& v = field(params, "seed");
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw ConfigError(fmt::format("parameter 'seed' must be a non-negative integer, got {}", v.dump()));
  }
  return v.get<std::uint64_t>();
}

double get_real(const Json& params, const char* key) {
  const Json& v = field(params, key);
  if (!v.is_number()) throw ConfigError(fmt::format("parameter '{}' must be a number, got {}", key, v.dump()));
  return v.get<double>();
}

std::string get_text(const Json& params, const char* key) {
  const Json& v = field(params, key);
  if (!v.is_string()) throw ConfigError(fmt::format("parameter '{}' must be a string, got {}", key, v.dump()));
  return v.get<std::string>();
}

bool get_flag(const Json& params, const char* key) {
  const Json& v = field(params, key);
  if (!v.is_boolean()) throw ConfigError(fmt::format("parameter '{}' must be true or false", key));
  return v.get<bool>();
}

std::optional<std::size_t> get_depth(const Json& params, const char* key) {
  if (field(params, key).is_null()) return std::nullopt;
  return get_count(params, key);
}

}  // namespace

TreeConfig tree_config_from_params(const Json& p) {
  TreeConfig c;
  c.criterion = criterion_from_string(get_text(p, "criterion"));
  c.max_depth = get_depth(p, "max_depth");
  c.min_samples_split = get_count(p, "min_samples_split");
  c.min_samples_leaf = get_count(p, "min_samples_leaf");
  c.max_features = max_features_from_string(get_text(p, "max_features"));
  c.seed = get_seed(p);
  c.validate();
  return c;
}

ForestConfig forest_config_from_params(const Json& p) {
  ForestConfig c;
  c.n_estimators = get_count(p, "n_estimators");
  c.tree = tree_config_from_params(p);
  c.bootstrap = get_flag(p, "bootstrap");
  c.seed = c.tree.seed;
  c.validate();
  return c;
}

GradientBoostConfig gradient_boost_config_from_params(const Json& p) {
  GradientBoostConfig c;
  c.learning_rate = get_real(p, "learning_rate");
  c.max_depth = get_count(p, "max_depth");
  c.n_estimators = get_count(p, "n_estimators");
  c.subsample = get_real(p, "subsample");
  c.seed = get_seed(p);
  c.validate();
  return c;
}

AdaBoostConfig adaboost_config_from_params(const Json& p) {
  AdaBoostConfig c;
  const std::string algorithm = get_text(p, "algorithm");
  if (algorithm != "SAMME.R") throw ConfigError(fmt::format("unsupported AdaBoost algorithm '{}'", algorithm));
  c.learning_rate = get_real(p, "learning_rate");
  c.n_estimators = get_count(p, "n_estimators");
  c.base_depth = get_count(p, "base_depth");
  c.seed = get_seed(p);
  c.validate();
  return c;
}

KnnConfig knn_config_from_params(const Json& p) {
  KnnConfig c;
  c.k = get_count(p, "n_neighbors");
  c.weighting = knn_weighting_from_string(get_text(p, "weights"));
  const std::string metric = get_text(p, "metric");
  c.p = get_real(p, "p");
  if (metric == "euclidean") {
    c.metric = Metric::minkowski;
    c.p = 2.0;
  } else {
    c.metric = metric_from_string(metric);
  }
  if (c.metric == Metric::manhattan && c.p != 1.0) {
    throw ConfigError(fmt::format("metric 'manhattan' implies p = 1, got p = {}", c.p));
  }
  c.validate();
  return c;
}

Json resolve_params(ModelKind kind, const Json& params) {
  if (!params.is_object()) throw ConfigError("model parameters must be a JSON object");
  Json out = default_params(kind);
  for (const auto& [key, value] : params.items()) {
    if (!out.contains(key)) {
      throw ConfigError(fmt::format("unknown parameter '{}' for model kind '{}'", key, to_string(kind)));
    }
    out[key] = value;
  }
  switch (kind) {
    case ModelKind::random_forest: forest_config_from_params(out); break;
    case ModelKind::decision_tree: tree_config_from_params(out); break;
    case ModelKind::knn:
      if (out["metric"] == "euclidean") {
        out["metric"] = "minkowski";
        out["p"] = 2;
      }
      knn_config_from_params(out);
      break;
    case ModelKind::gradient_boosting: gradient_boost_config_from_params(out); break;
    case ModelKind::adaboost: adaboost_config_from_params(out); break;
    case ModelKind::majority: break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// TrainedModel

TrainedModel::TrainedModel(ModelKind kind, Json params, ScalerParams scaler, Classifier classifier,
                           std::vector<std::string> feature_names)
    : kind_(kind),
      params_(std::move(params)),
      scaler_(std::move(scaler)),
      classifier_(std::move(classifier)),
      feature_names_(std::move(feature_names)) {
  const std::size_t n = std::visit([](const auto& m) { return m.n_features(); }, classifier_);
  if (n != feature_names_.size()) {
    throw std::invalid_argument(
        fmt::format("classifier expects {} features but {} names were given", n, feature_names_.size()));
  }
  if (scaler_.kind != ScalerKind::none && scaler_.columns.size() != n) {
    throw std::invalid_argument("scaler column count does not match the classifier");
  }
}

namespace {

struct Scored {
  std::array<double, 2> score;
  Label label;
};

Scored score_row(const Classifier& classifier, std::span<const double> row) {
  return std::visit(
      [&](const auto& m) -> Scored {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, AdaBoostModel>) {
          const double s = m.decision_function(row);
          const double p1 = sigmoid(2.0 * s);
          return {{1.0 - p1, p1}, s > 0.0 ? 1 : 0};
        } else if constexpr (std::is_same_v<M, GradientBoostModel>) {
          const double p1 = sigmoid(m.decision_function(row));
          return {{1.0 - p1, p1}, p1 > 0.5 ? 1 : 0};
        } else if constexpr (std::is_same_v<M, DecisionTreeModel>) {
          const auto s = m.predict_proba(row);
          return {s, s[1] > s[0] ? 1 : 0};
        } else {
          const auto s = m.predict_score(row);
          return {s, s[1] > s[0] ? 1 : 0};
        }
      },
      classifier);
}

}  // namespace

std::array<double, 2> TrainedModel::predict_score(std::span<const double> row) const {
  if (scaler_.kind == ScalerKind::none) return score_row(classifier_, row).score;
  std::vector<double> buf(row.begin(), row.end());
  apply_scaler(buf, scaler_);
  return score_row(classifier_, buf).score;
}

Label TrainedModel::predict(std::span<const double> row) const {
  if (scaler_.kind == ScalerKind::none) return score_row(classifier_, row).label;
  std::vector<double> buf(row.begin(), row.end());
  apply_scaler(buf, scaler_);
  return score_row(classifier_, buf).label;
}

Predictions TrainedModel::predict_table(const DataTable& table, std::size_t workers) const {
  if (table.cols() != n_features()) {
    throw std::invalid_argument(
        fmt::format("table has {} features, model expects {}", table.cols(), n_features()));
  }
  Predictions out;
  out.labels.resize(table.rows());
  out.scores.resize(table.rows());
  constexpr std::size_t kChunk = 256;
  const std::size_t chunks = (table.rows() + kChunk - 1) / kChunk;
  parallel_for(chunks, workers, [&](std::size_t c) {
    std::vector<double> buf(table.cols());
    const std::size_t end = std::min(table.rows(), (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      auto row = table.row(i);
      std::span<const double> input = row;
      if (scaler_.kind != ScalerKind::none) {
        std::copy(row.begin(), row.end(), buf.begin());
        apply_scaler(buf, scaler_);
        input = buf;
      }
      const Scored s = score_row(classifier_, input);
      out.labels[i] = s.label;
      out.scores[i] = s.score[1];
    }
  });
  return out;
}

TrainedModel fit_model(const ModelSpec& spec, const DataTable& train, std::size_t workers) {
  Json params = resolve_params(spec.kind, spec.params);
  ScalerParams scaler = fit_scaler(train, spec.scaling);
  const DataTable scaled = apply_scaler(train, scaler);
  Classifier classifier = [&]() -> Classifier {
    switch (spec.kind) {
      case ModelKind::random_forest: return fit_forest(scaled, forest_config_from_params(params), workers);
      case ModelKind::decision_tree: return fit_tree(scaled, tree_config_from_params(params));
      case ModelKind::knn: return KnnModel(scaled, knn_config_from_params(params));
      case ModelKind::gradient_boosting:
        return fit_gradient_boost(scaled, gradient_boost_config_from_params(params));
      case ModelKind::adaboost: return fit_adaboost(scaled, adaboost_config_from_params(params));
      case ModelKind::majority: return fit_majority(scaled);
    }
    throw ConfigError("unknown model kind");
  }();
  return TrainedModel(spec.kind, std::move(params), std::move(scaler), std::move(classifier), train.feature_names());
}

}  // namespace iotids
