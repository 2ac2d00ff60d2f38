#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "iotids/data.hpp"

namespace iotids {

enum class KnnWeighting { uniform, distance };
enum class Metric { manhattan, minkowski };

struct KnnConfig {
  std::size_t k = 5;
  KnnWeighting weighting = KnnWeighting::distance;
  Metric metric = Metric::manhattan;
  double p = 1.0;  // minkowski exponent; manhattan is minkowski with p = 1

  void validate() const;
};

/// Minkowski distance (sum |a_i - b_i|^p)^(1/p). Throws on length mismatch.
double distance(std::span<const double> a, std::span<const double> b, Metric metric, double p = 1.0);

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Exact K-nearest-neighbour classifier over a stored training table.
class KnnModel {
 public:
  KnnModel() = default;
  KnnModel(DataTable training, KnnConfig config);

  /// The k nearest training rows ordered by (distance, row index); ties at
  /// the k-th distance keep the lowest row indices.
  std::vector<Neighbor> nearest(std::span<const double> row) const;

  /// Uniform: class frequency among neighbours. Distance: mass 1/d per
  /// class, except that exact matches (d = 0) take over and the score is
  /// the class frequency among them.
  std::array<double, 2> predict_score(std::span<const double> row) const;
  Label predict(std::span<const double> row) const;

  const DataTable& training() const { return *training_; }
  const KnnConfig& config() const { return config_; }
  std::size_t n_features() const { return training_ ? training_->cols() : 0; }

 private:
  double metric_distance(std::span<const double> a, std::span<const double> b) const;

  std::shared_ptr<const DataTable> training_;
  KnnConfig config_;
};

std::string to_string(KnnWeighting weighting);
KnnWeighting knn_weighting_from_string(const std::string& name);
std::string to_string(Metric metric);
Metric metric_from_string(const std::string& name);

}  // namespace iotids
