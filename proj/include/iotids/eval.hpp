#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "iotids/data.hpp"

namespace iotids {

/// Binary confusion counts with class 1 (attack) as the positive class.
struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

ConfusionMatrix confusion(std::span<const Label> truth, std::span<const Label> predicted);

/// precision = TP/(TP+FP), recall = TP/(TP+FN), F1 = 2PR/(P+R),
/// accuracy = (TP+TN)/total. A metric whose denominator is zero is
/// reported as 0 with its `*_defined` flag cleared.
struct MetricsReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  bool precision_defined = true;
  bool recall_defined = true;
  bool f1_defined = true;
};

/// Throws std::invalid_argument on an empty matrix.
MetricsReport metrics(const ConfusionMatrix& cm);

double accuracy(std::span<const Label> truth, std::span<const Label> predicted);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;

  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

/// Points from (0,0) to (1,1), one per distinct score, sweeping thresholds
/// downward with "score >= threshold predicts 1". Tied scores move along a
/// diagonal segment. `auc` is the trapezoidal area under the points.
struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

/// Throws std::invalid_argument when lengths differ, a score is not finite,
/// or the truth vector lacks one of the classes.
RocCurve roc_curve(std::span<const Label> truth, std::span<const double> scores);

/// Trapezoidal area under a polyline of ROC points.
double trapezoid_auc(std::span<const RocPoint> points);

/// Half-away-from-zero rounding to `decimals` places, used for tables.
double round_to(double value, int decimals);

}  // namespace iotids
