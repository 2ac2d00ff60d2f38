#include "iotids/knn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "iotids/error.hpp"

namespace iotids {

void KnnConfig::validate() const {
  if (k < 1) throw ConfigError("n_neighbors must be at least 1");
  if (!(p >= 1.0) || !std::isfinite(p)) throw ConfigError("minkowski p must be a finite number >= 1");
}

double distance(std::span<const double> a, std::span<const double> b, Metric metric, double p) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(fmt::format("distance between rows of length {} and {}", a.size(), b.size()));
  }
  if (metric == Metric::manhattan || p == 1.0) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s;
  }
  if (p == 2.0) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::pow(std::abs(a[i] - b[i]), p);
  return std::pow(s, 1.0 / p);
}

KnnModel::KnnModel(DataTable training, KnnConfig config)
    : training_(std::make_shared<const DataTable>(std::move(training))), config_(config) {
  config_.validate();
  if (training_->empty()) throw FitError("k-NN: empty training table");
  if (config_.k > training_->rows()) {
    throw FitError(fmt::format("k-NN: k = {} exceeds the {} training rows", config_.k, training_->rows()));
  }
}

double KnnModel::metric_distance(std::span<const double> a, std::span<const double> b) const {
  return distance(a, b, config_.metric, config_.metric == Metric::manhattan ? 1.0 : config_.p);
}

std::vector<Neighbor> KnnModel::nearest(std::span<const double> row) const {
  if (row.size() != n_features()) {
    throw std::invalid_argument(fmt::format("row has {} features, model expects {}", row.size(), n_features()));
  }
  const DataTable& t = *training_;
  const auto closer = [](const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
  };
  // Max-heap on (distance, index) holding the k best rows seen so far.
  std::vector<Neighbor> heap;
  heap.reserve(config_.k);
  for (std::size_t i = 0; i < t.rows(); ++i) {
    const Neighbor candidate{i, metric_distance(row, t.row(i))};
    if (heap.size() < config_.k) {
      heap.push_back(candidate);
      std::push_heap(heap.begin(), heap.end(), closer);
    } else if (closer(candidate, heap.front())) {
      std::pop_heap(heap.begin(), heap.end(), closer);
      heap.back() = candidate;
      std::push_heap(heap.begin(), heap.end(), closer);
    }
  }
  std::sort_heap(heap.begin(), heap.end(), closer);
  return heap;
}

std::array<double, 2> KnnModel::predict_score(std::span<const double> row) const {
  const auto neighbors = nearest(row);
  std::array<double, 2> mass{0.0, 0.0};
  if (config_.weighting == KnnWeighting::uniform) {
    for (const auto& nb : neighbors) mass[static_cast<std::size_t>(training_->label(nb.index))] += 1.0;
  } else {
    bool exact = false;
    for (const auto& nb : neighbors) {
      if (nb.distance == 0.0) {
        exact = true;
        mass[static_cast<std::size_t>(training_->label(nb.index))] += 1.0;
      }
    }
    if (!exact) {
      for (const auto& nb : neighbors) {
        mass[static_cast<std::size_t>(training_->label(nb.index))] += 1.0 / nb.distance;
      }
    }
  }
  const double total = mass[0] + mass[1];
  return {mass[0] / total, mass[1] / total};
}

Label KnnModel::predict(std::span<const double> row) const {
  const auto s = predict_score(row);
  return s[1] > s[0] ? 1 : 0;
}

std::string to_string(KnnWeighting weighting) { return weighting == KnnWeighting::uniform ? "uniform" : "distance"; }

KnnWeighting knn_weighting_from_string(const std::string& name) {
  if (name == "uniform") return KnnWeighting::uniform;
  if (name == "distance") return KnnWeighting::distance;
  throw ConfigError(fmt::format("unknown k-NN weighting '{}'", name));
}

std::string to_string(Metric metric) { return metric == Metric::manhattan ? "manhattan" : "minkowski"; }

Metric metric_from_string(const std::string& name) {
  if (name == "manhattan") return Metric::manhattan;
  if (name == "minkowski") return Metric::minkowski;
  throw ConfigError(fmt::format("unknown metric '{}'", name));
}

}  // namespace iotids
