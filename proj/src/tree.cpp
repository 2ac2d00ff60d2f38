#include "iotids/tree.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "iotids/error.hpp"
#include "iotids/random.hpp"

namespace iotids {

void TreeConfig::validate() const {
  if (max_depth && *max_depth < 1) throw ConfigError("max_depth must be at least 1");
  if (min_samples_split < 2) throw ConfigError("min_samples_split must be at least 2");
  if (min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be at least 1");
}

double impurity(std::array<double, 2> class_weight, Criterion criterion) {
  const double total = class_weight[0] + class_weight[1];
  if (!(total > 0.0)) throw std::invalid_argument("impurity of an empty node is undefined");
  const double p0 = class_weight[0] / total;
  const double p1 = class_weight[1] / total;
  if (criterion == Criterion::gini) return 1.0 - (p0 * p0 + p1 * p1);
  double h = 0.0;
  if (p0 > 0.0) h -= p0 * std::log2(p0);
  if (p1 > 0.0) h -= p1 * std::log2(p1);
  return h;
}

// ---------------------------------------------------------------------------
// DecisionTreeModel

DecisionTreeModel::DecisionTreeModel(std::vector<TreeNode> nodes, TreeConfig config, std::size_t n_features)
    : nodes_(std::move(nodes)), config_(config), n_features_(n_features) {
  if (nodes_.empty()) throw std::invalid_argument("a tree needs at least one node");
  const auto n = static_cast<std::int32_t>(nodes_.size());
  for (std::int32_t i = 0; i < n; ++i) {
    const TreeNode& node = nodes_[static_cast<std::size_t>(i)];
    if (node.is_leaf()) continue;
    if (static_cast<std::size_t>(node.feature) >= n_features_) {
      throw std::invalid_argument(fmt::format("node {} splits on feature {} of {}", i, node.feature, n_features_));
    }
    if (node.left <= i || node.right <= i || node.left >= n || node.right >= n) {
      throw std::invalid_argument(fmt::format("node {} has invalid children", i));
    }
  }
}

void DecisionTreeModel::check_row(std::span<const double> row) const {
  if (row.size() != n_features_) {
    throw std::invalid_argument(fmt::format("row has {} features, model expects {}", row.size(), n_features_));
  }
}

std::size_t DecisionTreeModel::leaf_index(std::span<const double> row) const {
  check_row(row);
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const TreeNode& node = nodes_[i];
    i = static_cast<std::size_t>(row[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                                                : node.right);
  }
  return i;
}

std::array<double, 2> DecisionTreeModel::predict_proba(std::span<const double> row) const {
  const auto& w = nodes_[leaf_index(row)].class_weight;
  const double total = w[0] + w[1];
  if (!(total > 0.0)) return {0.5, 0.5};
  return {w[0] / total, w[1] / total};
}

Label DecisionTreeModel::predict(std::span<const double> row) const {
  const auto p = predict_proba(row);
  return p[1] > p[0] ? 1 : 0;
}

double DecisionTreeModel::predict_value(std::span<const double> row) const {
  return nodes_[leaf_index(row)].value;
}

std::size_t DecisionTreeModel::depth() const {
  // Children always follow their parent, so one forward pass suffices.
  std::vector<std::size_t> level(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (!nodes_[i].is_leaf()) {
      level[static_cast<std::size_t>(nodes_[i].left)] = level[i] + 1;
      level[static_cast<std::size_t>(nodes_[i].right)] = level[i] + 1;
    }
  }
  return deepest;
}

std::size_t DecisionTreeModel::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

void DecisionTreeModel::set_leaf_value(std::size_t node, double value) {
  if (node >= nodes_.size() || !nodes_[node].is_leaf()) {
    throw std::invalid_argument(fmt::format("node {} is not a leaf", node));
  }
  nodes_[node].value = value;
}

// ---------------------------------------------------------------------------
// ColumnIndex

ColumnIndex::ColumnIndex(const DataTable& table) : rows_(table.rows()) {
  if (rows_ > UINT32_MAX) throw std::length_error("table too large for a 32-bit row index");
  order_.resize(rows_ * table.cols());
  values_.resize(rows_ * table.cols());
  std::vector<std::pair<double, std::uint32_t>> column(rows_);
  for (std::size_t f = 0; f < table.cols(); ++f) {
    for (std::size_t r = 0; r < rows_; ++r) column[r] = {table.at(r, f), static_cast<std::uint32_t>(r)};
    std::sort(column.begin(), column.end());
    for (std::size_t r = 0; r < rows_; ++r) {
      values_[f * rows_ + r] = column[r].first;
      order_[f * rows_ + r] = column[r].second;
    }
  }
}

// ---------------------------------------------------------------------------
// Growing

namespace {

constexpr double kMinDecrease = 1e-12;

struct ClassStats {
  std::array<double, 2> w{0.0, 0.0};
  std::uint64_t n = 0;

  void add(double weight, std::uint32_t count, double target) {
    w[target > 0.5 ? 1 : 0] += weight;
    n += count;
  }
  ClassStats minus(const ClassStats& o) const { return {{w[0] - o.w[0], w[1] - o.w[1]}, n - o.n}; }
};

struct RegressionStats {
  double sw = 0.0;
  double swy = 0.0;
  std::uint64_t n = 0;

  void add(double weight, std::uint32_t count, double target) {
    sw += weight;
    swy += weight * target;
    n += count;
  }
  RegressionStats minus(const RegressionStats& o) const { return {sw - o.sw, swy - o.swy, n - o.n}; }
};

struct ClassificationPolicy {
  using Stats = ClassStats;
  Criterion criterion;

  double decrease(const Stats& parent, const Stats& left, const Stats& right) const {
    const double total = parent.w[0] + parent.w[1];
    const double wl = left.w[0] + left.w[1];
    const double wr = right.w[0] + right.w[1];
    if (!(wl > 0.0) || !(wr > 0.0)) return 0.0;
    return impurity(parent.w, criterion) - (wl / total) * impurity(left.w, criterion) -
           (wr / total) * impurity(right.w, criterion);
  }
  bool pure(const Stats& s) const { return s.w[0] <= 0.0 || s.w[1] <= 0.0; }
  void fill(TreeNode& node, const Stats& s) const {
    node.class_weight = s.w;
    node.samples = s.n;
    const double total = s.w[0] + s.w[1];
    node.value = total > 0.0 ? s.w[1] / total : 0.0;
  }
};

struct RegressionPolicy {
  using Stats = RegressionStats;

  // Weighted variance decrease, written via sums of weighted targets.
  double decrease(const Stats& parent, const Stats& left, const Stats& right) const {
    if (!(left.sw > 0.0) || !(right.sw > 0.0)) return 0.0;
    return (left.swy * left.swy / left.sw + right.swy * right.swy / right.sw - parent.swy * parent.swy / parent.sw) /
           parent.sw;
  }
  bool pure(const Stats&) const { return false; }
  void fill(TreeNode& node, const Stats& s) const {
    node.samples = s.n;
    node.class_weight = {0.0, 0.0};
    node.value = s.sw > 0.0 ? s.swy / s.sw : 0.0;
  }
};

std::size_t sampled_feature_count(MaxFeatures mode, std::size_t n_features) {
  if (mode == MaxFeatures::all) return n_features;
  const auto k = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n_features))));
  return std::max<std::size_t>(1, k);
}

double midpoint_threshold(double lo, double hi) {
  const double t = std::midpoint(lo, hi);
  // Adjacent doubles can round the midpoint up to `hi`, which would route
  // `hi` to the left child.
  return t < hi ? t : lo;
}

template <typename Policy>
class Grower {
  using Stats = typename Policy::Stats;

  struct Candidate {
    std::size_t feature = 0;
    double threshold = 0.0;
    double decrease = kMinDecrease;
    bool found = false;
  };

  struct OpenNode {
    std::size_t id = 0;
    std::size_t depth = 0;
    Stats total;
    std::size_t distinct_rows = 0;
    bool searching = false;
    std::vector<std::size_t> features;
    Candidate best;
  };

  struct ScanState {
    Stats left;
    double last = 0.0;
    bool has_last = false;
  };

 public:
  Grower(const DataTable& table, std::span<const double> targets, const SampleSet& samples,
         const TreeConfig& config, Policy policy, const GrowOptions& options)
      : table_(table),
        targets_(targets),
        samples_(samples),
        config_(config),
        policy_(policy),
        options_(options),
        rng_(config.seed) {}

  DecisionTreeModel grow() {
    config_.validate();
    const std::size_t n = table_.rows();
    if (n == 0) throw FitError("cannot fit a tree on an empty table");
    if (!samples_.counts.empty() && samples_.counts.size() != n) {
      throw std::invalid_argument("sample counts do not match the table");
    }
    if (!samples_.weights.empty() && samples_.weights.size() != n) {
      throw std::invalid_argument("sample weights do not match the table");
    }
    if (targets_.size() != n) throw std::invalid_argument("targets do not match the table");

    row_slot_.assign(n, -1);
    std::vector<OpenNode> open(1);
    for (std::size_t i = 0; i < n; ++i) {
      if (count(i) == 0) continue;
      row_slot_[i] = 0;
      open[0].total.add(weight(i), count(i), targets_[i]);
      ++open[0].distinct_rows;
    }
    if (open[0].distinct_rows == 0) throw FitError("cannot fit a tree on an empty sample");
    nodes_.emplace_back();

    while (!open.empty()) {
      select_candidates(open);
      search(open);
      open = split_level(open);
    }
    return DecisionTreeModel(std::move(nodes_), config_, table_.cols());
  }

 private:
  std::uint32_t count(std::size_t i) const { return samples_.counts.empty() ? 1U : samples_.counts[i]; }
  double weight(std::size_t i) const {
    const double w = samples_.weights.empty() ? 1.0 : samples_.weights[i];
    return w * count(i);
  }

  void select_candidates(std::vector<OpenNode>& open) {
    const std::size_t d = table_.cols();
    const std::size_t k = sampled_feature_count(config_.max_features, d);
    std::vector<std::size_t> pool(d);
    for (OpenNode& node : open) {
      node.searching = (!config_.max_depth || node.depth < *config_.max_depth) &&
                       node.total.n >= config_.min_samples_split && node.total.n >= 2 * config_.min_samples_leaf &&
                       !policy_.pure(node.total) && d > 0;
      if (!node.searching) continue;
      std::iota(pool.begin(), pool.end(), std::size_t{0});
      if (k < d) {
        for (std::size_t i = 0; i < k; ++i) {
          const auto j = i + static_cast<std::size_t>(rng_.uniform_index(d - i));
          std::swap(pool[i], pool[j]);
        }
      }
      node.features.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
      std::sort(node.features.begin(), node.features.end());
    }
  }

  void push(ScanState& s, OpenNode& node, std::size_t feature, double value, std::size_t row) {
    if (s.has_last && value > s.last) {
      const std::uint64_t n_left = s.left.n;
      const std::uint64_t n_right = node.total.n - n_left;
      if (n_left >= config_.min_samples_leaf && n_right >= config_.min_samples_leaf) {
        const double dec = policy_.decrease(node.total, s.left, node.total.minus(s.left));
        if (dec > node.best.decrease) {
          node.best = {feature, midpoint_threshold(s.last, value), dec, true};
        }
      }
    }
    s.left.add(weight(row), count(row), targets_[row]);
    s.last = value;
    s.has_last = true;
  }

  void search(std::vector<OpenNode>& open) {
    const std::size_t d = table_.cols();
    std::vector<char> needed(d, 0);
    double sorted_cost = 0.0;
    bool any = false;
    for (const OpenNode& node : open) {
      if (!node.searching) continue;
      any = true;
      for (std::size_t f : node.features) needed[f] = 1;
      const auto m = static_cast<double>(node.distinct_rows);
      sorted_cost += m * std::log2(m + 2.0) * static_cast<double>(node.features.size());
    }
    if (!any) return;
    const double presorted_cost =
        static_cast<double>(std::count(needed.begin(), needed.end(), 1)) * static_cast<double>(table_.rows());

    ScanMode mode = options_.mode;
    if (mode == ScanMode::automatic) mode = presorted_cost <= sorted_cost ? ScanMode::presorted : ScanMode::per_node;
    if (mode == ScanMode::presorted) {
      if (!options_.index) {
        owned_index_ = std::make_unique<ColumnIndex>(table_);
        options_.index = owned_index_.get();
      }
      search_presorted(open, needed);
    } else {
      search_per_node(open);
    }
  }

  void search_presorted(std::vector<OpenNode>& open, const std::vector<char>& needed) {
    std::vector<ScanState> state(open.size());
    std::vector<char> uses(open.size());
    for (std::size_t f = 0; f < table_.cols(); ++f) {
      if (!needed[f]) continue;
      for (std::size_t j = 0; j < open.size(); ++j) {
        const auto& feats = open[j].features;
        uses[j] = open[j].searching && std::binary_search(feats.begin(), feats.end(), f);
        state[j] = ScanState{};
      }
      const auto order = options_.index->order(f);
      const auto values = options_.index->values(f);
      for (std::size_t k = 0; k < order.size(); ++k) {
        const std::uint32_t row = order[k];
        const std::int32_t slot = row_slot_[row];
        if (slot < 0 || !uses[static_cast<std::size_t>(slot)]) continue;
        const auto j = static_cast<std::size_t>(slot);
        push(state[j], open[j], f, values[k], row);
      }
    }
  }

  void search_per_node(std::vector<OpenNode>& open) {
    std::vector<std::vector<std::size_t>> members(open.size());
    for (std::size_t i = 0; i < row_slot_.size(); ++i) {
      const std::int32_t slot = row_slot_[i];
      if (slot >= 0 && open[static_cast<std::size_t>(slot)].searching) {
        members[static_cast<std::size_t>(slot)].push_back(i);
      }
    }
    std::vector<std::pair<double, std::size_t>> column;
    for (std::size_t j = 0; j < open.size(); ++j) {
      if (!open[j].searching) continue;
      for (std::size_t f : open[j].features) {
        column.clear();
        for (std::size_t row : members[j]) column.emplace_back(table_.at(row, f), row);
        std::sort(column.begin(), column.end());
        ScanState state;
        for (const auto& [value, row] : column) push(state, open[j], f, value, row);
      }
    }
  }

  std::vector<OpenNode> split_level(std::vector<OpenNode>& open) {
    std::vector<OpenNode> next;
    // Slot of each open node's left child in `next`; the right child follows.
    std::vector<std::int32_t> child_slot(open.size(), -1);
    for (std::size_t j = 0; j < open.size(); ++j) {
      OpenNode& node = open[j];
      TreeNode& tn = nodes_[node.id];
      policy_.fill(tn, node.total);
      if (!node.best.found) continue;
      const std::size_t left_id = nodes_.size();
      nodes_.emplace_back();
      nodes_.emplace_back();
      TreeNode& parent = nodes_[node.id];
      parent.feature = static_cast<std::int32_t>(node.best.feature);
      parent.threshold = node.best.threshold;
      parent.left = static_cast<std::int32_t>(left_id);
      parent.right = static_cast<std::int32_t>(left_id + 1);
      child_slot[j] = static_cast<std::int32_t>(next.size());
      OpenNode left;
      left.id = left_id;
      left.depth = node.depth + 1;
      OpenNode right = left;
      right.id = left_id + 1;
      next.push_back(std::move(left));
      next.push_back(std::move(right));
    }
    for (std::size_t i = 0; i < row_slot_.size(); ++i) {
      const std::int32_t slot = row_slot_[i];
      if (slot < 0) continue;
      const auto j = static_cast<std::size_t>(slot);
      if (child_slot[j] < 0) {
        row_slot_[i] = -1;
        continue;
      }
      const Candidate& best = open[j].best;
      const std::int32_t target = child_slot[j] + (table_.at(i, best.feature) <= best.threshold ? 0 : 1);
      row_slot_[i] = target;
      OpenNode& child = next[static_cast<std::size_t>(target)];
      child.total.add(weight(i), count(i), targets_[i]);
      ++child.distinct_rows;
    }
    return next;
  }

  const DataTable& table_;
  std::span<const double> targets_;
  SampleSet samples_;
  TreeConfig config_;
  Policy policy_;
  GrowOptions options_;
  std::unique_ptr<ColumnIndex> owned_index_;
  Rng rng_;
  std::vector<std::int32_t> row_slot_;
  std::vector<TreeNode> nodes_;
};

std::vector<double> label_targets(const DataTable& table) {
  std::vector<double> y(table.rows());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<double>(table.label(i));
  return y;
}

}  // namespace

DecisionTreeModel fit_tree(const DataTable& table, const TreeConfig& config) {
  return fit_tree(table, config, SampleSet{});
}

DecisionTreeModel fit_tree(const DataTable& table, const TreeConfig& config, const SampleSet& samples,
                           const GrowOptions& options) {
  const auto targets = label_targets(table);
  Grower<ClassificationPolicy> grower(table, targets, samples, config, ClassificationPolicy{config.criterion},
                                      options);
  return grower.grow();
}

DecisionTreeModel fit_regression_tree(const DataTable& table, std::span<const double> targets,
                                      const TreeConfig& config, const SampleSet& samples,
                                      const GrowOptions& options) {
  Grower<RegressionPolicy> grower(table, targets, samples, config, RegressionPolicy{}, options);
  return grower.grow();
}

std::optional<Split> best_split(const DataTable& table, std::span<const std::size_t> rows,
                                std::span<const std::size_t> features, Criterion criterion,
                                std::size_t min_samples_leaf) {
  if (rows.empty()) throw std::invalid_argument("best_split needs at least one row");
  if (min_samples_leaf < 1) throw std::invalid_argument("min_samples_leaf must be at least 1");
  std::vector<std::size_t> feats(features.begin(), features.end());
  std::sort(feats.begin(), feats.end());
  feats.erase(std::unique(feats.begin(), feats.end()), feats.end());
  for (std::size_t f : feats) {
    if (f >= table.cols()) throw std::invalid_argument(fmt::format("feature {} out of range", f));
  }

  ClassStats total;
  std::vector<std::size_t> sorted_rows(rows.begin(), rows.end());
  std::sort(sorted_rows.begin(), sorted_rows.end());
  for (std::size_t r : sorted_rows) {
    if (r >= table.rows()) throw std::invalid_argument(fmt::format("row {} out of range", r));
    total.add(1.0, 1, static_cast<double>(table.label(r)));
  }
  const ClassificationPolicy policy{criterion};
  if (policy.pure(total)) return std::nullopt;

  std::optional<Split> best;
  double best_decrease = kMinDecrease;
  std::vector<std::pair<double, std::size_t>> column;
  for (std::size_t f : feats) {
    column.clear();
    for (std::size_t r : sorted_rows) column.emplace_back(table.at(r, f), r);
    std::sort(column.begin(), column.end());
    ClassStats left;
    for (std::size_t k = 0; k < column.size(); ++k) {
      if (k > 0 && column[k].first > column[k - 1].first && left.n >= min_samples_leaf &&
          total.n - left.n >= min_samples_leaf) {
        const double dec = policy.decrease(total, left, total.minus(left));
        if (dec > best_decrease) {
          best_decrease = dec;
          best = Split{f, midpoint_threshold(column[k - 1].first, column[k].first), dec};
        }
      }
      left.add(1.0, 1, static_cast<double>(table.label(column[k].second)));
    }
  }
  return best;
}

std::string to_string(Criterion criterion) { return criterion == Criterion::gini ? "gini" : "entropy"; }

Criterion criterion_from_string(const std::string& name) {
  if (name == "gini") return Criterion::gini;
  if (name == "entropy") return Criterion::entropy;
  throw ConfigError(fmt::format("unknown criterion '{}'", name));
}

std::string to_string(MaxFeatures max_features) { return max_features == MaxFeatures::all ? "all" : "sqrt"; }

MaxFeatures max_features_from_string(const std::string& name) {
  if (name == "all" || name == "none") return MaxFeatures::all;
  if (name == "sqrt") return MaxFeatures::sqrt;
  throw ConfigError(fmt::format("unknown max_features '{}'", name));
}

}  // namespace iotids
