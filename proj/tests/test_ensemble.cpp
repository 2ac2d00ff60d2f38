#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "iotids/ensemble.hpp"
#include "iotids/error.hpp"
#include "support/synthetic.hpp"

using namespace iotids;

namespace {

TreeNode leaf(double w0, double w1, double value = 0.0) {
  TreeNode n;
  n.class_weight = {w0, w1};
  n.samples = static_cast<std::uint64_t>(w0 + w1);
  n.value = value;
  return n;
}

// Stump on feature 0 at `threshold` with the given leaves.
DecisionTreeModel stump(double threshold, TreeNode left, TreeNode right) {
  TreeNode root;
  root.feature = 0;
  root.threshold = threshold;
  root.left = 1;
  root.right = 2;
  root.class_weight = {left.class_weight[0] + right.class_weight[0], left.class_weight[1] + right.class_weight[1]};
  root.samples = left.samples + right.samples;
  return DecisionTreeModel({root, left, right}, {}, 1);
}

double log_loss(const DataTable& t, std::span<const double> raw) {
  double s = 0.0;
  for (std::size_t i = 0; i < t.rows(); ++i) {
    const double p = 1.0 / (1.0 + std::exp(-raw[i]));
    s -= t.label(i) == 1 ? std::log(p) : std::log(1.0 - p);
  }
  return s / static_cast<double>(t.rows());
}

double accuracy_on(const DataTable& t, const auto& model) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < t.rows(); ++i) hit += model.predict(t.row(i)) == t.label(i);
  return static_cast<double>(hit) / static_cast<double>(t.rows());
}

// Scalar re-derivation of the boosting recurrence for 1-D data with
// depth-1 trees and no subsampling.
std::vector<double> reference_boost(const std::vector<double>& x, const std::vector<int>& y, double lr,
                                    std::size_t rounds) {
  const std::size_t n = x.size();
  const double n1 = std::accumulate(y.begin(), y.end(), 0.0);
  std::vector<double> f(n, std::log(n1 / (static_cast<double>(n) - n1)));
  std::vector<double> sorted = x;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (std::size_t m = 0; m < rounds; ++m) {
    std::vector<double> r(n), h(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double p = 1.0 / (1.0 + std::exp(-f[i]));
      r[i] = y[i] - p;
      h[i] = p * (1.0 - p);
    }
    double best_gain = 1e-12;
    double best_thr = 0.0;
    bool found = false;
    for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
      const double thr = (sorted[k] + sorted[k + 1]) / 2.0;
      double sl = 0, nl = 0, sr = 0, nr = 0;
      for (std::size_t i = 0; i < n; ++i) (x[i] <= thr ? sl : sr) += r[i], (x[i] <= thr ? nl : nr) += 1;
      const double gain = (sl * sl / nl + sr * sr / nr - (sl + sr) * (sl + sr) / n) / n;
      if (gain > best_gain) best_gain = gain, best_thr = thr, found = true;
    }
    double num[2] = {0, 0}, den[2] = {0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      const int side = found && x[i] > best_thr ? 1 : 0;
      num[side] += r[i];
      den[side] += h[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      const int side = found && x[i] > best_thr ? 1 : 0;
      f[i] += lr * num[side] / std::max(den[side], 1e-12);
    }
  }
  return f;
}

}  // namespace

// ---------------------------------------------------------------------------
// Forest

TEST(Forest, SingleTreeWithoutBootstrapIsFitTree) {
  const DataTable t = fixtures::noisy_linear(150, 4, 0.7, 1);
  ForestConfig cfg;
  cfg.n_estimators = 1;
  cfg.bootstrap = false;
  cfg.seed = 77;
  const ForestModel forest = fit_forest(t, cfg);
  TreeConfig tree = cfg.tree;
  tree.seed = forest_member_seed(cfg.seed, 0);
  const DecisionTreeModel single = fit_tree(t, tree);
  for (std::size_t i = 0; i < t.rows(); ++i) {
    EXPECT_EQ(forest.predict(t.row(i)), single.predict(t.row(i)));
    EXPECT_EQ(forest.predict_score(t.row(i)), single.predict_proba(t.row(i)));
  }
}

TEST(Forest, PaperConfigFitsSeparableBlobs) {
  const DataTable t = fixtures::blobs(200, 2, 3.0, 5);
  ForestConfig cfg;
  cfg.seed = 3;
  EXPECT_GE(accuracy_on(t, fit_forest(t, cfg)), 0.99);
}

TEST(Forest, WorkerCountDoesNotChangeModel) {
  const DataTable t = fixtures::noisy_linear(300, 6, 0.5, 2);
  ForestConfig cfg;
  cfg.n_estimators = 25;
  cfg.seed = 9;
  const ForestModel a = fit_forest(t, cfg, 1);
  const ForestModel b = fit_forest(t, cfg, 4);
  ASSERT_EQ(a.members().size(), 25u);
  EXPECT_EQ(a.members(), b.members());
}

TEST(Forest, ScoreIsMeanOfMembers) {
  const DecisionTreeModel t1 = stump(0.5, leaf(3, 1), leaf(0, 4));
  const DecisionTreeModel t2 = stump(1.5, leaf(1, 1), leaf(1, 3));
  const DecisionTreeModel t3 = stump(-1.0, leaf(2, 0), leaf(1, 4));
  const ForestModel forest({t1, t2, t3});
  const double x0 = 0.0;
  // Hand-averaged: (3/4 + 1/2 + 1/5) / 3 for class 0.
  auto s = forest.predict_score(std::span(&x0, 1));
  EXPECT_NEAR(s[0], (0.75 + 0.5 + 0.2) / 3.0, 1e-15);
  EXPECT_NEAR(s[1], (0.25 + 0.5 + 0.8) / 3.0, 1e-15);
  const double x1 = 1.0;
  s = forest.predict_score(std::span(&x1, 1));
  EXPECT_NEAR(s[1], (1.0 + 0.5 + 0.8) / 3.0, 1e-15);
  // Duplicating a member keeps the mean when all members agree in weight.
  const ForestModel doubled({t1, t1});
  EXPECT_EQ(doubled.predict_score(std::span(&x0, 1)), ForestModel({t1}).predict_score(std::span(&x0, 1)));
}

TEST(Forest, PureAndTiedVotes) {
  const double x = 0.0;
  const ForestModel pure({DecisionTreeModel({leaf(0, 3)}, {}, 1), DecisionTreeModel({leaf(0, 1)}, {}, 1)});
  EXPECT_EQ(pure.predict_score(std::span(&x, 1)), (std::array<double, 2>{0.0, 1.0}));
  const ForestModel tied({DecisionTreeModel({leaf(1, 0)}, {}, 1), DecisionTreeModel({leaf(0, 1)}, {}, 1)});
  EXPECT_EQ(tied.predict_score(std::span(&x, 1)), (std::array<double, 2>{0.5, 0.5}));
  EXPECT_EQ(tied.predict(std::span(&x, 1)), 0);
}

TEST(Forest, RejectsEmptyAndMismatchedRows) {
  EXPECT_THROW(fit_forest(DataTable(), {}), FitError);
  const ForestModel f = fit_forest(fixtures::blobs(20, 2, 2.0, 1), {});
  const std::vector<double> wrong{1.0};
  EXPECT_THROW(f.predict(wrong), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Gradient boosting

TEST(GradientBoost, ZeroLearningRateKeepsPrior) {
  const DataTable t({"x"}, {0, 1, 2, 3, 4}, {1, 1, 1, 0, 0});
  GradientBoostConfig cfg{0.0, 3, 20, 1.0, 1};
  const auto m = fit_gradient_boost(t, cfg);
  for (std::size_t i = 0; i < t.rows(); ++i) {
    EXPECT_EQ(m.predict(t.row(i)), 1);
    EXPECT_NEAR(m.predict_score(t.row(i))[1], 0.6, 1e-12);
  }
}

TEST(GradientBoost, MatchesScalarRecurrence) {
  const std::vector<double> x{0, 1, 2, 3};
  const std::vector<int> y{0, 0, 1, 1};
  const DataTable t({"x"}, x, std::vector<Label>(y.begin(), y.end()));
  const auto m = fit_gradient_boost(t, {0.5, 1, 50, 1.0, 0});
  const auto ref = reference_boost(x, y, 0.5, 50);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(m.decision_function(t.row(i)), ref[i], 1e-9);
    EXPECT_EQ(m.predict(t.row(i)), t.label(i));
  }
}

TEST(GradientBoost, MatchesScalarRecurrenceOnNoisyData) {
  std::vector<double> x;
  std::vector<int> y;
  Rng rng(4);
  for (int i = 0; i < 40; ++i) {
    x.push_back(static_cast<double>(rng.uniform_index(12)));
    y.push_back(rng.uniform_real() < x.back() / 12.0 ? 1 : 0);
  }
  const DataTable t({"x"}, x, std::vector<Label>(y.begin(), y.end()));
  const auto m = fit_gradient_boost(t, {0.3, 1, 30, 1.0, 0});
  const auto ref = reference_boost(x, y, 0.3, 30);
  for (std::size_t i = 0; i < t.rows(); ++i) EXPECT_NEAR(m.decision_function(t.row(i)), ref[i], 1e-9);
}

TEST(GradientBoost, LogLossNonIncreasingWithoutSubsampling) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const DataTable t = fixtures::noisy_linear(200, 3, 1.0, seed);
    std::vector<double> losses;
    fit_gradient_boost(t, {0.1, 3, 60, 1.0, seed},
                       [&](std::size_t, std::span<const double> raw) { losses.push_back(log_loss(t, raw)); });
    ASSERT_EQ(losses.size(), 60u);
    for (std::size_t m = 1; m < losses.size(); ++m) EXPECT_LE(losses[m], losses[m - 1] + 1e-9) << "round " << m;
  }
}

TEST(GradientBoost, ObserverScoresMatchModel) {
  const DataTable t = fixtures::noisy_linear(80, 2, 0.5, 6);
  std::vector<double> last;
  const auto m = fit_gradient_boost(t, {0.2, 2, 10, 0.8, 6},
                                    [&](std::size_t, std::span<const double> raw) { last.assign(raw.begin(), raw.end()); });
  for (std::size_t i = 0; i < t.rows(); ++i) EXPECT_NEAR(last[i], m.decision_function(t.row(i)), 1e-9);
}

TEST(GradientBoost, SubsampleDeterministic) {
  const DataTable t = fixtures::noisy_linear(150, 3, 0.5, 8);
  const GradientBoostConfig cfg{0.1, 3, 30, 0.8, 21};
  const auto a = fit_gradient_boost(t, cfg);
  const auto b = fit_gradient_boost(t, cfg);
  EXPECT_EQ(a.trees(), b.trees());
  EXPECT_EQ(a.base_score(), b.base_score());
}

TEST(GradientBoost, HandBuiltScores) {
  const GradientBoostModel empty(0.0, 0.1, {}, 1);
  const double x = 0.0;
  EXPECT_EQ(empty.predict_score(std::span(&x, 1)), (std::array<double, 2>{0.5, 0.5}));
  EXPECT_EQ(empty.predict(std::span(&x, 1)), 0);

  const GradientBoostModel one(0.25, 0.5, {stump(1.0, leaf(0, 0, -2.0), leaf(0, 0, 3.0))}, 1);
  const double lo = 0.0, hi = 2.0;
  EXPECT_NEAR(one.decision_function(std::span(&lo, 1)), 0.25 - 1.0, 1e-15);
  EXPECT_NEAR(one.predict_score(std::span(&hi, 1))[1], 1.0 / (1.0 + std::exp(-1.75)), 1e-15);

  const GradientBoostModel big(40.0, 0.1, {}, 1);
  EXPECT_GT(big.predict_score(std::span(&x, 1))[1], 1.0 - 1e-12);
}

TEST(GradientBoost, RejectsSingleClassAndBadConfig) {
  const DataTable one({"x"}, {0, 1}, {1, 1});
  EXPECT_THROW(fit_gradient_boost(one, {}), FitError);
  const DataTable t = fixtures::blobs(10, 1, 1.0, 1);
  EXPECT_THROW(fit_gradient_boost(t, {0.1, 3, 10, 0.0, 0}), ConfigError);
  EXPECT_THROW(fit_gradient_boost(t, {0.1, 3, 10, 1.5, 0}), ConfigError);
  EXPECT_THROW(fit_gradient_boost(t, {-0.1, 3, 10, 1.0, 0}), ConfigError);
}

// ---------------------------------------------------------------------------
// AdaBoost

TEST(AdaBoost, OneRoundSeparatesOneDimensionalData) {
  const DataTable t({"x"}, {0, 1, 2, 3, 4, 5}, {0, 0, 0, 1, 1, 1});
  const auto m = fit_adaboost(t, {AdaBoostVariant::samme_r, 0.1, 1, 1, 0});
  EXPECT_EQ(m.members().size(), 1u);
  EXPECT_DOUBLE_EQ(accuracy_on(t, m), 1.0);
}

TEST(AdaBoost, MisclassifiedWeightGrows) {
  // The best stump splits at 1.5 and must get x = 4 wrong.
  const DataTable t({"x"}, {0, 1, 2, 3, 4}, {0, 0, 1, 1, 0});
  std::vector<std::vector<double>> rounds;
  fit_adaboost(t, {AdaBoostVariant::samme_r, 0.5, 1, 1, 0},
               [&](std::size_t, std::span<const double> w) { rounds.emplace_back(w.begin(), w.end()); });
  ASSERT_EQ(rounds.size(), 1u);
  const auto& w = rounds[0];
  EXPECT_GT(w[4], w[2]);
  EXPECT_GT(w[4], w[3]);
  EXPECT_NEAR(w[2], w[3], 1e-15);
}

TEST(AdaBoost, WeightsPositiveAndNormalised) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const DataTable t = fixtures::noisy_linear(120, 3, 1.0, seed);
    std::size_t seen = 0;
    fit_adaboost(t, {AdaBoostVariant::samme_r, 1.0, 40, 1 + seed % 2, seed}, [&](std::size_t, std::span<const double> w) {
      ++seen;
      double sum = 0.0;
      for (double v : w) {
        EXPECT_GT(v, 0.0);
        sum += v;
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
    });
    EXPECT_GT(seen, 0u);
  }
}

TEST(AdaBoost, StopsEarlyOnDegenerateRound) {
  // Constant feature: no stump can split, so no member survives.
  const DataTable t({"x"}, {1, 1, 1, 1}, {0, 1, 0, 1});
  const auto m = fit_adaboost(t, {});
  EXPECT_TRUE(m.members().empty());
  const double x = 1.0;
  EXPECT_EQ(m.predict_score(std::span(&x, 1)), (std::array<double, 2>{0.5, 0.5}));
  EXPECT_EQ(m.predict(std::span(&x, 1)), 0);
}

TEST(AdaBoost, HandBuiltScores) {
  const double x = 0.0;
  const AdaBoostModel pure({DecisionTreeModel({leaf(0, 2)}, {}, 1)}, 1);
  EXPECT_EQ(pure.predict(std::span(&x, 1)), 1);
  // Clipped log odds: 0.5 * log((1 - 1e-10) / 1e-10).
  EXPECT_NEAR(pure.decision_function(std::span(&x, 1)), 0.5 * std::log((1.0 - 1e-10) / 1e-10), 1e-9);

  const AdaBoostModel opposing({DecisionTreeModel({leaf(1, 3)}, {}, 1), DecisionTreeModel({leaf(3, 1)}, {}, 1)}, 1);
  EXPECT_DOUBLE_EQ(opposing.decision_function(std::span(&x, 1)), 0.0);
  EXPECT_EQ(opposing.predict(std::span(&x, 1)), 0);

  const AdaBoostModel single({DecisionTreeModel({leaf(1, 3)}, {}, 1)}, 1);
  const double s = 0.5 * std::log(3.0);
  EXPECT_NEAR(single.predict_score(std::span(&x, 1))[1], 1.0 / (1.0 + std::exp(-2.0 * s)), 1e-15);
  EXPECT_NEAR(single.predict_score(std::span(&x, 1))[1], 0.75, 1e-15);
}

TEST(AdaBoost, RejectsSingleClass) {
  EXPECT_THROW(fit_adaboost(DataTable({"x"}, {0, 1}, {0, 0}), {}), FitError);
}

// ---------------------------------------------------------------------------
// Shared properties

TEST(Ensembles, ScoresAreDistributions) {
  const DataTable t = fixtures::noisy_linear(150, 4, 0.8, 12);
  ForestConfig fc;
  fc.n_estimators = 15;
  const auto forest = fit_forest(t, fc);
  const auto gb = fit_gradient_boost(t, {0.1, 3, 40, 0.8, 1});
  const auto ada = fit_adaboost(t, {AdaBoostVariant::samme_r, 0.5, 30, 1, 1});
  for (std::size_t i = 0; i < t.rows(); ++i) {
    for (const auto& s : {forest.predict_score(t.row(i)), gb.predict_score(t.row(i)), ada.predict_score(t.row(i))}) {
      EXPECT_GE(s[0], 0.0);
      EXPECT_GE(s[1], 0.0);
      EXPECT_NEAR(s[0] + s[1], 1.0, 1e-9);
    }
  }
}

TEST(Ensembles, PaperConfigsOnBlobs) {
  const DataTable t = fixtures::blobs(400, 2, 2.5, 31);
  EXPECT_GE(accuracy_on(t, fit_gradient_boost(t, {})), 0.99);
  EXPECT_GE(accuracy_on(t, fit_adaboost(t, {})), 0.99);
}
