#include "iotids/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace iotids {

ConfusionMatrix confusion(std::span<const Label> truth, std::span<const Label> predicted) {
  if (truth.size() != predicted.size()) {
    throw std::invalid_argument(
        fmt::format("confusion: {} labels but {} predictions", truth.size(), predicted.size()));
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const Label y = truth[i];
    const Label p = predicted[i];
    if ((y != 0 && y != 1) || (p != 0 && p != 1)) {
      throw std::invalid_argument(fmt::format("confusion: non-binary value at position {}", i));
    }
    if (y == 1) {
      (p == 1 ? cm.tp : cm.fn) += 1;
    } else {
      (p == 1 ? cm.fp : cm.tn) += 1;
    }
  }
  return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
  const std::uint64_t total = cm.total();
  if (total == 0) throw std::invalid_argument("metrics of an empty confusion matrix");
  MetricsReport r;
  r.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(total);
  r.precision_defined = cm.tp + cm.fp > 0;
  r.recall_defined = cm.tp + cm.fn > 0;
  r.precision = r.precision_defined ? static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp) : 0.0;
  r.recall = r.recall_defined ? static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn) : 0.0;
  r.f1_defined = r.precision_defined && r.recall_defined && r.precision + r.recall > 0.0;
  r.f1 = r.f1_defined ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

double accuracy(std::span<const Label> truth, std::span<const Label> predicted) {
  return metrics(confusion(truth, predicted)).accuracy;
}

double trapezoid_auc(std::span<const RocPoint> points) {
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    area += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) / 2.0;
  }
  return area;
}

RocCurve roc_curve(std::span<const Label> truth, std::span<const double> scores) {
  if (truth.size() != scores.size()) {
    throw std::invalid_argument(fmt::format("roc_curve: {} labels but {} scores", truth.size(), scores.size()));
  }
  std::uint64_t positives = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] != 0 && truth[i] != 1) throw std::invalid_argument("roc_curve: non-binary label");
    if (!std::isfinite(scores[i])) throw std::invalid_argument("roc_curve: non-finite score");
    positives += static_cast<std::uint64_t>(truth[i]);
  }
  const std::uint64_t negatives = truth.size() - positives;
  if (positives == 0 || negatives == 0) throw std::invalid_argument("roc_curve: both classes must be present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double threshold = scores[order[k]];
    while (k < order.size() && scores[order[k]] == threshold) {
      (truth[order[k]] == 1 ? tp : fp) += 1;
      ++k;
    }
    curve.points.push_back(
        {static_cast<double>(fp) / static_cast<double>(negatives), static_cast<double>(tp) / static_cast<double>(positives)});
  }
  curve.auc = trapezoid_auc(curve.points);
  return curve;
}

double round_to(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(value * scale) / scale;
}

}  // namespace iotids
