#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "iotids/data.hpp"
#include "iotids/tree.hpp"

namespace iotids {

// ---------------------------------------------------------------------------
// Random forest

struct ForestConfig {
  std::size_t n_estimators = 200;
  TreeConfig tree{Criterion::gini, 8, 2, 1, MaxFeatures::sqrt, 0};
  bool bootstrap = true;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Seed of the i-th forest member. The member tree is grown with this seed
/// (tree.seed in ForestConfig is ignored) and its bootstrap draw uses a
/// stream derived from it.
std::uint64_t forest_member_seed(std::uint64_t seed, std::size_t index);

/// Soft-voting forest: the score is the mean of member class probabilities.
class ForestModel {
 public:
  ForestModel() = default;
  explicit ForestModel(std::vector<DecisionTreeModel> members);

  std::array<double, 2> predict_score(std::span<const double> row) const;
  Label predict(std::span<const double> row) const;

  const std::vector<DecisionTreeModel>& members() const { return members_; }
  std::size_t n_features() const;

 private:
  std::vector<DecisionTreeModel> members_;
};

/// Members are trained on up to `workers` threads (0 = hardware
/// concurrency); the result does not depend on the worker count.
ForestModel fit_forest(const DataTable& table, const ForestConfig& config, std::size_t workers = 1);

// ---------------------------------------------------------------------------
// Gradient boosting (binary log-loss)

struct GradientBoostConfig {
  double learning_rate = 0.01;
  std::size_t max_depth = 4;
  std::size_t n_estimators = 500;
  double subsample = 0.8;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Newton leaf values have their hessian sum floored at this value.
inline constexpr double kNewtonDenominatorFloor = 1e-12;

class GradientBoostModel {
 public:
  GradientBoostModel() = default;
  GradientBoostModel(double base_score, double learning_rate, std::vector<DecisionTreeModel> trees,
                     std::size_t n_features);

  /// Raw additive score F(x) = base + lr * sum of tree outputs.
  double decision_function(std::span<const double> row) const;
  /// (1 - sigmoid(F), sigmoid(F)).
  std::array<double, 2> predict_score(std::span<const double> row) const;
  /// 1 iff sigmoid(F) > 0.5.
  Label predict(std::span<const double> row) const;

  double base_score() const { return base_score_; }
  double learning_rate() const { return learning_rate_; }
  const std::vector<DecisionTreeModel>& trees() const { return trees_; }
  std::size_t n_features() const { return n_features_; }

 private:
  double base_score_ = 0.0;
  double learning_rate_ = 0.0;
  std::vector<DecisionTreeModel> trees_;
  std::size_t n_features_ = 0;
};

/// Called after each boosting round with the raw scores F of every
/// training row.
using BoostRoundObserver = std::function<void(std::size_t round, std::span<const double> raw_scores)>;

GradientBoostModel fit_gradient_boost(const DataTable& table, const GradientBoostConfig& config,
                                      const BoostRoundObserver& observer = {});

double sigmoid(double x);

// ---------------------------------------------------------------------------
// AdaBoost (real-valued SAMME.R, two classes)

enum class AdaBoostVariant { samme_r };

struct AdaBoostConfig {
  AdaBoostVariant variant = AdaBoostVariant::samme_r;
  double learning_rate = 0.1;
  std::size_t n_estimators = 100;
  std::size_t base_depth = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Member probabilities are clipped to [eps, 1 - eps] before taking logs.
inline constexpr double kProbabilityClip = 1e-10;

class AdaBoostModel {
 public:
  AdaBoostModel() = default;
  AdaBoostModel(std::vector<DecisionTreeModel> members, std::size_t n_features);

  /// Half log-odds contribution of one member: (log p1 - log p0) / 2.
  static double contribution(const DecisionTreeModel& member, std::span<const double> row);

  /// S(x) = sum of member contributions.
  double decision_function(std::span<const double> row) const;
  /// (1 - sigmoid(2S), sigmoid(2S)).
  std::array<double, 2> predict_score(std::span<const double> row) const;
  /// 1 iff S > 0.
  Label predict(std::span<const double> row) const;

  const std::vector<DecisionTreeModel>& members() const { return members_; }
  std::size_t n_features() const { return n_features_; }

 private:
  std::vector<DecisionTreeModel> members_;
  std::size_t n_features_ = 0;
};

/// Called after each accepted round with the normalized sample weights.
using AdaBoostRoundObserver = std::function<void(std::size_t round, std::span<const double> weights)>;

/// Stops early when a round's tree is a single leaf; that tree is dropped.
AdaBoostModel fit_adaboost(const DataTable& table, const AdaBoostConfig& config,
                           const AdaBoostRoundObserver& observer = {});

}  // namespace iotids
