#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iotids/data.hpp"

namespace iotids {

enum class Criterion { gini, entropy };
enum class MaxFeatures { all, sqrt };

struct TreeConfig {
  Criterion criterion = Criterion::gini;
  std::optional<std::size_t> max_depth;  // nullopt: unlimited
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
  MaxFeatures max_features = MaxFeatures::all;
  std::uint64_t seed = 0;

  void validate() const;

  friend bool operator==(const TreeConfig&, const TreeConfig&) = default;
};

/// Flat node record. Internal nodes send a row left iff
/// row[feature] <= threshold. Every node keeps the (weighted) class totals
/// and sample count it was built from; `value` is the regression output
/// used by gradient boosting.
struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::array<double, 2> class_weight{0.0, 0.0};
  std::uint64_t samples = 0;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Gini (1 - sum p^2) or entropy (-sum p log2 p) of a two-class weight
/// pair. Throws std::invalid_argument when the total is not positive.
double impurity(std::array<double, 2> class_weight, Criterion criterion);

struct Split {
  std::size_t feature = 0;
  double threshold = 0.0;
  double impurity_decrease = 0.0;
};

/// Best axis-aligned split of `rows` (repeats count as multiplicity) over
/// `features`. Candidate thresholds are midpoints between consecutive
/// distinct values. Ties go to the lowest feature index, then the lowest
/// threshold. Returns nullopt when no split leaves at least
/// `min_samples_leaf` samples on both sides with a positive decrease.
std::optional<Split> best_split(const DataTable& table, std::span<const std::size_t> rows,
                                std::span<const std::size_t> features, Criterion criterion,
                                std::size_t min_samples_leaf = 1);

class DecisionTreeModel {
 public:
  DecisionTreeModel() = default;
  /// Validates the node graph: children after parents, features in range.
  DecisionTreeModel(std::vector<TreeNode> nodes, TreeConfig config, std::size_t n_features);

  std::size_t leaf_index(std::span<const double> row) const;
  std::array<double, 2> predict_proba(std::span<const double> row) const;
  /// argmax of predict_proba; an exact tie predicts class 0.
  Label predict(std::span<const double> row) const;
  double predict_value(std::span<const double> row) const;

  /// Longest root-to-leaf path, in edges.
  std::size_t depth() const;
  std::size_t leaf_count() const;

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeConfig& config() const { return config_; }
  std::size_t n_features() const { return n_features_; }

  void set_leaf_value(std::size_t node, double value);

  friend bool operator==(const DecisionTreeModel&, const DecisionTreeModel&) = default;

 private:
  void check_row(std::span<const double> row) const;

  std::vector<TreeNode> nodes_;
  TreeConfig config_;
  std::size_t n_features_ = 0;
};

/// Row order of every feature, sorted by (value, row index). Built once per
/// table and shared read-only by ensemble members.
class ColumnIndex {
 public:
  explicit ColumnIndex(const DataTable& table);

  std::span<const std::uint32_t> order(std::size_t feature) const {
    return {order_.data() + feature * rows_, rows_};
  }
  /// Feature values in the same order as `order(feature)`.
  std::span<const double> values(std::size_t feature) const { return {values_.data() + feature * rows_, rows_}; }
  std::size_t rows() const { return rows_; }

 private:
  std::size_t rows_ = 0;
  std::vector<std::uint32_t> order_;
  std::vector<double> values_;
};

/// Per-row multiplicities and weights. An empty `counts` means every row
/// once; an empty `weights` means unit weight. A row contributes
/// counts[i] * weights[i] to impurity sums and counts[i] to sample-count
/// rules (min_samples_split / min_samples_leaf).
struct SampleSet {
  std::span<const std::uint32_t> counts;
  std::span<const double> weights;
};

/// How the grower searches thresholds. Both modes produce identical trees;
/// `automatic` picks the cheaper one per level.
enum class ScanMode { automatic, presorted, per_node };

struct GrowOptions {
  const ColumnIndex* index = nullptr;  // built on demand when null
  ScanMode mode = ScanMode::automatic;
};

DecisionTreeModel fit_tree(const DataTable& table, const TreeConfig& config);
DecisionTreeModel fit_tree(const DataTable& table, const TreeConfig& config, const SampleSet& samples,
                           const GrowOptions& options = {});

/// Squared-error regression tree on `targets` (one per table row). Leaf
/// `value` is the weighted target mean; the criterion field is ignored.
DecisionTreeModel fit_regression_tree(const DataTable& table, std::span<const double> targets,
                                      const TreeConfig& config, const SampleSet& samples,
                                      const GrowOptions& options = {});

std::string to_string(Criterion criterion);
Criterion criterion_from_string(const std::string& name);
std::string to_string(MaxFeatures max_features);
MaxFeatures max_features_from_string(const std::string& name);

}  // namespace iotids
