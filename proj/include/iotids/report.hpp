#pragma once

#include <span>
#include <string>
#include <vector>

#include "iotids/eval.hpp"
#include "iotids/model.hpp"

namespace iotids {

/// Standalone SVG: unit square axes, the ROC polyline, the chance diagonal
/// and an "AUC = x.xx" annotation.
std::string render_roc_svg(const RocCurve& curve, const std::string& title);

/// ROC points as "fpr,tpr" CSV with a header row.
std::string roc_to_csv(const RocCurve& curve);

/// 2x2 confusion matrix CSV (rows = actual, columns = predicted).
std::string confusion_to_csv(const ConfusionMatrix& cm);

struct ComparisonInput {
  std::string model;
  MetricsReport metrics;
  std::optional<double> auc;
};

/// One row of the comparison table, already rounded: accuracy in percent
/// to 2 decimals, the other columns to 3 decimals.
struct ComparisonRow {
  std::string model;
  double accuracy_percent = 0.0;
  std::optional<double> auc;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;

  std::string to_text() const;
  Json to_json() const;
};

/// Rows sorted by accuracy, highest first; equal accuracies keep input order.
ComparisonTable summarize_comparison(std::span<const ComparisonInput> inputs);

}  // namespace iotids
