#include "iotids/select.hpp"

#include <numeric>

#include <fmt/format.h>

#include "iotids/error.hpp"
#include "iotids/eval.hpp"
#include "iotids/parallel.hpp"
#include "iotids/random.hpp"

namespace iotids {

std::vector<std::size_t> FoldPlan::validation_rows(std::size_t fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] == fold) rows.push_back(i);
  }
  return rows;
}

std::vector<std::size_t> FoldPlan::training_rows(std::size_t fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] != fold) rows.push_back(i);
  }
  return rows;
}

FoldPlan make_folds(const DataTable& table, std::size_t n_folds, std::uint64_t seed, bool stratified) {
  if (n_folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
  FoldPlan plan{n_folds, seed, stratified, std::vector<std::size_t>(table.rows(), 0)};
  if (table.rows() < n_folds) {
    throw DataError(fmt::format("{} rows cannot fill {} folds", table.rows(), n_folds));
  }
  std::size_t next_fold = 0;
  auto assign = [&](std::vector<std::size_t>& pool, std::uint64_t s) {
    Rng rng(s);
    rng.shuffle(std::span(pool));
    for (std::size_t idx : pool) {
      plan.assignments[idx] = next_fold;
      next_fold = (next_fold + 1) % n_folds;
    }
  };
  if (stratified) {
    const auto counts = table.class_counts();
    for (Label c = 0; c <= 1; ++c) {
      if (counts[static_cast<std::size_t>(c)] < n_folds) {
        throw DataError(fmt::format("class {} has {} rows, fewer than the {} folds", c,
                                    counts[static_cast<std::size_t>(c)], n_folds));
      }
    }
    for (Label c = 0; c <= 1; ++c) {
      std::vector<std::size_t> pool;
      for (std::size_t i = 0; i < table.rows(); ++i) {
        if (table.label(i) == c) pool.push_back(i);
      }
      assign(pool, derive_seed(seed, static_cast<std::uint64_t>(c)));
    }
  } else {
    std::vector<std::size_t> pool(table.rows());
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    assign(pool, seed);
  }
  return plan;
}

std::string to_string(SelectionMetric metric) { return metric == SelectionMetric::accuracy ? "accuracy" : "f1"; }

SelectionMetric selection_metric_from_string(const std::string& name) {
  if (name == "accuracy") return SelectionMetric::accuracy;
  if (name == "f1") return SelectionMetric::f1;
  throw ConfigError(fmt::format("unknown selection metric '{}'", name));
}

namespace {

void check_plan(const DataTable& table, const FoldPlan& plan) {
  if (plan.assignments.size() != table.rows()) {
    throw std::invalid_argument(
        fmt::format("fold plan covers {} rows but the table has {}", plan.assignments.size(), table.rows()));
  }
}

double score_fold(const DataTable& table, const ModelSpec& spec, const FoldPlan& plan, std::size_t fold,
                  SelectionMetric metric) {
  const DataTable train = table.subset(plan.training_rows(fold));
  const DataTable valid = table.subset(plan.validation_rows(fold));
  const TrainedModel model = fit_model(spec, train);
  const Predictions pred = model.predict_table(valid);
  const MetricsReport m = metrics(confusion(valid.labels(), pred.labels));
  return metric == SelectionMetric::accuracy ? m.accuracy : m.f1;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

CvResult cross_validate(const DataTable& table, const ModelSpec& spec, const FoldPlan& plan,
                        SelectionMetric metric, std::size_t workers) {
  check_plan(table, plan);
  CvResult result;
  result.fold_scores.resize(plan.n_folds);
  parallel_for(plan.n_folds, workers,
               [&](std::size_t f) { result.fold_scores[f] = score_fold(table, spec, plan, f, metric); });
  result.mean = mean_of(result.fold_scores);
  return result;
}

std::size_t ParamGrid::size() const {
  std::size_t n = 1;
  for (const auto& axis : axes) n *= axis.values.size();
  return n;
}

Json ParamGrid::combination(std::size_t i) const {
  Json params = base.params.is_null() ? Json::object() : base.params;
  // Last axis varies fastest; keys are written in declaration order.
  std::vector<std::size_t> pick(axes.size());
  for (std::size_t a = axes.size(); a-- > 0;) {
    pick[a] = i % axes[a].values.size();
    i /= axes[a].values.size();
  }
  for (std::size_t a = 0; a < axes.size(); ++a) params[axes[a].name] = axes[a].values[pick[a]];
  return params;
}

GridSearchResult grid_search(const DataTable& table, const ParamGrid& grid, const FoldPlan& plan,
                             SelectionMetric metric, std::size_t workers) {
  check_plan(table, plan);
  for (const auto& axis : grid.axes) {
    if (axis.values.empty()) throw ConfigError(fmt::format("grid axis '{}' has no values", axis.name));
  }
  const std::size_t n_cells = grid.size();
  const std::size_t n_folds = plan.n_folds;

  GridSearchResult result;
  result.cells.resize(n_cells);
  std::vector<ModelSpec> specs(n_cells);
  std::vector<std::optional<std::string>> errors(n_cells * n_folds);
  for (std::size_t c = 0; c < n_cells; ++c) {
    result.cells[c].params = grid.combination(c);
    result.cells[c].fold_scores.assign(n_folds, 0.0);
    specs[c] = ModelSpec{grid.base.kind, result.cells[c].params, grid.base.scaling};
  }

  parallel_for(n_cells * n_folds, workers, [&](std::size_t task) {
    const std::size_t c = task / n_folds;
    const std::size_t f = task % n_folds;
    try {
      result.cells[c].fold_scores[f] = score_fold(table, specs[c], plan, f, metric);
    } catch (const FitError& e) {
      errors[task] = e.what();
    } catch (const ConfigError& e) {
      errors[task] = e.what();
    }
  });

  std::optional<std::size_t> best;
  for (std::size_t c = 0; c < n_cells; ++c) {
    GridCell& cell = result.cells[c];
    for (std::size_t f = 0; f < n_folds && !cell.error; ++f) {
      if (errors[c * n_folds + f]) cell.error = fmt::format("fold {}: {}", f, *errors[c * n_folds + f]);
    }
    if (cell.error) continue;
    cell.mean = mean_of(cell.fold_scores);
    if (!best || cell.mean > result.cells[*best].mean) best = c;
  }
  if (!best) {
    throw FitError(fmt::format("grid search: all {} combinations failed; first error: {}", n_cells,
                               result.cells.front().error.value_or("unknown")));
  }
  result.best_index = *best;
  result.best_params = resolve_params(grid.base.kind, result.cells[*best].params);
  result.best_mean = result.cells[*best].mean;
  result.best_model = fit_model(specs[*best], table, workers);
  return result;
}

}  // namespace iotids
