#include "iotids/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "iotids/error.hpp"
#include "iotids/parallel.hpp"
#include "iotids/random.hpp"

namespace iotids {

namespace {

void check_dims(std::span<const double> row, std::size_t n_features) {
  if (row.size() != n_features) {
    throw std::invalid_argument(fmt::format("row has {} features, model expects {}", row.size(), n_features));
  }
}

void require_both_classes(const DataTable& table, const char* model) {
  if (table.empty()) throw FitError(fmt::format("{}: empty training table", model));
  const auto counts = table.class_counts();
  if (counts[0] == 0 || counts[1] == 0) {
    throw FitError(fmt::format("{}: training data contains a single class", model));
  }
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// ---------------------------------------------------------------------------
// Random forest

void ForestConfig::validate() const {
  if (n_estimators < 1) throw ConfigError("n_estimators must be at least 1");
  tree.validate();
}

std::uint64_t forest_member_seed(std::uint64_t seed, std::size_t index) { return derive_seed(seed, index); }

ForestModel::ForestModel(std::vector<DecisionTreeModel> members) : members_(std::move(members)) {
  if (members_.empty()) throw std::invalid_argument("a forest needs at least one member");
  for (const auto& m : members_) {
    if (m.n_features() != members_.front().n_features()) {
      throw std::invalid_argument("forest members disagree on feature count");
    }
  }
}

std::size_t ForestModel::n_features() const { return members_.empty() ? 0 : members_.front().n_features(); }

std::array<double, 2> ForestModel::predict_score(std::span<const double> row) const {
  check_dims(row, n_features());
  std::array<double, 2> sum{0.0, 0.0};
  for (const auto& tree : members_) {
    const auto p = tree.predict_proba(row);
    sum[0] += p[0];
    sum[1] += p[1];
  }
  const auto n = static_cast<double>(members_.size());
  return {sum[0] / n, sum[1] / n};
}

Label ForestModel::predict(std::span<const double> row) const {
  const auto s = predict_score(row);
  return s[1] > s[0] ? 1 : 0;
}

ForestModel fit_forest(const DataTable& table, const ForestConfig& config, std::size_t workers) {
  config.validate();
  if (table.empty()) throw FitError("random forest: empty training table");
  const ColumnIndex index(table);
  std::vector<DecisionTreeModel> members(config.n_estimators);
  parallel_for(config.n_estimators, workers, [&](std::size_t i) {
    TreeConfig tree = config.tree;
    tree.seed = forest_member_seed(config.seed, i);
    std::vector<std::uint32_t> counts;
    if (config.bootstrap) {
      counts.assign(table.rows(), 0);
      Rng rng(derive_seed(tree.seed, 0xb00757a9));
      for (std::size_t k = 0; k < table.rows(); ++k) ++counts[rng.uniform_index(table.rows())];
    }
    members[i] = fit_tree(table, tree, SampleSet{counts, {}}, GrowOptions{&index});
  });
  return ForestModel(std::move(members));
}

// ---------------------------------------------------------------------------
// Gradient boosting

void GradientBoostConfig::validate() const {
  // A zero learning rate is accepted: it freezes the model at the prior.
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be a finite non-negative number");
  }
  if (max_depth < 1) throw ConfigError("max_depth must be at least 1");
  if (!(subsample > 0.0 && subsample <= 1.0)) throw ConfigError("subsample must lie in (0, 1]");
}

GradientBoostModel::GradientBoostModel(double base_score, double learning_rate,
                                       std::vector<DecisionTreeModel> trees, std::size_t n_features)
    : base_score_(base_score), learning_rate_(learning_rate), trees_(std::move(trees)), n_features_(n_features) {
  for (const auto& t : trees_) {
    if (t.n_features() != n_features_) throw std::invalid_argument("boosting member feature count mismatch");
  }
}

double GradientBoostModel::decision_function(std::span<const double> row) const {
  check_dims(row, n_features_);
  double sum = 0.0;
  for (const auto& t : trees_) sum += t.predict_value(row);
  return base_score_ + learning_rate_ * sum;
}

std::array<double, 2> GradientBoostModel::predict_score(std::span<const double> row) const {
  const double p1 = sigmoid(decision_function(row));
  return {1.0 - p1, p1};
}

Label GradientBoostModel::predict(std::span<const double> row) const { return predict_score(row)[1] > 0.5 ? 1 : 0; }

GradientBoostModel fit_gradient_boost(const DataTable& table, const GradientBoostConfig& config,
                                      const BoostRoundObserver& observer) {
  config.validate();
  require_both_classes(table, "gradient boosting");
  const std::size_t n = table.rows();
  const auto counts = table.class_counts();
  const double base = std::log(static_cast<double>(counts[1]) / static_cast<double>(counts[0]));

  const ColumnIndex index(table);
  TreeConfig tree_config;
  tree_config.max_depth = config.max_depth;
  tree_config.max_features = MaxFeatures::all;

  std::vector<double> raw(n, base);
  std::vector<double> prob(n);
  std::vector<double> residual(n);
  std::vector<std::uint32_t> in_bag(n, 1);
  std::vector<std::size_t> order(n);
  std::vector<std::size_t> leaf_of(n);
  const std::size_t bag_size =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(static_cast<double>(n) * config.subsample)));

  std::vector<DecisionTreeModel> trees;
  trees.reserve(config.n_estimators);
  for (std::size_t m = 0; m < config.n_estimators; ++m) {
    for (std::size_t i = 0; i < n; ++i) {
      prob[i] = sigmoid(raw[i]);
      residual[i] = static_cast<double>(table.label(i)) - prob[i];
    }
    const std::uint64_t round_seed = derive_seed(config.seed, m);
    if (bag_size < n) {
      // Partial Fisher-Yates: the first bag_size positions form the draw.
      std::iota(order.begin(), order.end(), std::size_t{0});
      Rng rng(round_seed);
      for (std::size_t k = 0; k < bag_size; ++k) {
        std::swap(order[k], order[k + static_cast<std::size_t>(rng.uniform_index(n - k))]);
      }
      std::fill(in_bag.begin(), in_bag.end(), 0U);
      for (std::size_t k = 0; k < bag_size; ++k) in_bag[order[k]] = 1;
    }
    tree_config.seed = round_seed;
    DecisionTreeModel tree =
        fit_regression_tree(table, residual, tree_config, SampleSet{in_bag, {}}, GrowOptions{&index});

    const std::size_t n_nodes = tree.nodes().size();
    std::vector<double> numerator(n_nodes, 0.0);
    std::vector<double> denominator(n_nodes, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      leaf_of[i] = tree.leaf_index(table.row(i));
      if (!in_bag[i]) continue;
      numerator[leaf_of[i]] += residual[i];
      denominator[leaf_of[i]] += prob[i] * (1.0 - prob[i]);
    }
    for (std::size_t k = 0; k < n_nodes; ++k) {
      if (tree.nodes()[k].is_leaf()) {
        tree.set_leaf_value(k, numerator[k] / std::max(denominator[k], kNewtonDenominatorFloor));
      }
    }
    for (std::size_t i = 0; i < n; ++i) raw[i] += config.learning_rate * tree.nodes()[leaf_of[i]].value;
    trees.push_back(std::move(tree));
    if (observer) observer(m, raw);
  }
  return GradientBoostModel(base, config.learning_rate, std::move(trees), table.cols());
}

// ---------------------------------------------------------------------------
// AdaBoost

void AdaBoostConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be a finite positive number");
  }
  if (n_estimators < 1) throw ConfigError("n_estimators must be at least 1");
  if (base_depth < 1) throw ConfigError("base_depth must be at least 1");
}

AdaBoostModel::AdaBoostModel(std::vector<DecisionTreeModel> members, std::size_t n_features)
    : members_(std::move(members)), n_features_(n_features) {
  for (const auto& t : members_) {
    if (t.n_features() != n_features_) throw std::invalid_argument("boosting member feature count mismatch");
  }
}

double AdaBoostModel::contribution(const DecisionTreeModel& member, std::span<const double> row) {
  const auto p = member.predict_proba(row);
  const double p0 = std::clamp(p[0], kProbabilityClip, 1.0 - kProbabilityClip);
  const double p1 = std::clamp(p[1], kProbabilityClip, 1.0 - kProbabilityClip);
  return 0.5 * (std::log(p1) - std::log(p0));
}

double AdaBoostModel::decision_function(std::span<const double> row) const {
  check_dims(row, n_features_);
  double s = 0.0;
  for (const auto& m : members_) s += contribution(m, row);
  return s;
}

std::array<double, 2> AdaBoostModel::predict_score(std::span<const double> row) const {
  const double p1 = sigmoid(2.0 * decision_function(row));
  return {1.0 - p1, p1};
}

Label AdaBoostModel::predict(std::span<const double> row) const { return decision_function(row) > 0.0 ? 1 : 0; }

AdaBoostModel fit_adaboost(const DataTable& table, const AdaBoostConfig& config,
                           const AdaBoostRoundObserver& observer) {
  config.validate();
  require_both_classes(table, "AdaBoost");
  const std::size_t n = table.rows();
  const ColumnIndex index(table);
  std::vector<double> weights(n, 1.0 / static_cast<double>(n));

  TreeConfig tree_config;
  tree_config.max_depth = config.base_depth;
  tree_config.max_features = MaxFeatures::all;

  std::vector<DecisionTreeModel> members;
  for (std::size_t m = 0; m < config.n_estimators; ++m) {
    tree_config.seed = derive_seed(config.seed, m);
    DecisionTreeModel tree = fit_tree(table, tree_config, SampleSet{{}, weights}, GrowOptions{&index});
    if (tree.leaf_count() == 1) break;

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double signed_label = table.label(i) == 1 ? 1.0 : -1.0;
      const double h = AdaBoostModel::contribution(tree, table.row(i));
      weights[i] *= std::exp(-config.learning_rate * signed_label * h);
      total += weights[i];
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
      throw FitError(fmt::format("AdaBoost: sample weights degenerated in round {}", m));
    }
    for (double& w : weights) w /= total;
    members.push_back(std::move(tree));
    if (observer) observer(m, weights);
  }
  return AdaBoostModel(std::move(members), table.cols());
}

}  // namespace iotids
