#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace iotids {

/// Class ids: 0 = normal traffic, 1 = attack.
using Label = int;

/// Named numeric feature matrix (row-major) plus a binary label per row.
/// The constructor enforces the shape and label invariants; every model in
/// the library consumes this type.
class DataTable {
 public:
  DataTable() = default;
  DataTable(std::vector<std::string> feature_names, std::vector<double> values,
            std::vector<Label> labels);

  std::size_t rows() const { return labels_.size(); }
  std::size_t cols() const { return feature_names_.size(); }
  bool empty() const { return labels_.empty(); }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * cols(), cols()};
  }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }
  Label label(std::size_t r) const { return labels_[r]; }

  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<Label>& labels() const { return labels_; }

  /// Number of rows per class, indexed by label.
  std::array<std::size_t, 2> class_counts() const;

  /// Rows in the given order (repeats allowed).
  DataTable subset(std::span<const std::size_t> indices) const;

  friend bool operator==(const DataTable&, const DataTable&) = default;

 private:
  std::vector<std::string> feature_names_;
  std::vector<double> values_;
  std::vector<Label> labels_;
};

/// Loads a comma-separated file with a header row. `label_column` is a
/// header name or "last". Throws DataError with the offending row/column on
/// any malformed cell, a label outside {0, 1}, or duplicate header names.
DataTable load_csv(const std::filesystem::path& path, const std::string& label_column = "last");

/// Same as load_csv, reading from an in-memory document. `source` names the
/// input in error messages.
DataTable parse_csv(std::string_view text, const std::string& label_column = "last",
                    const std::string& source = "<memory>");

/// Strict numeric literal parse: optional sign, digits with optional
/// fraction, optional exponent. Surrounding blanks are ignored. No nan/inf,
/// hex or trailing garbage.
bool parse_number(std::string_view cell, double& out);

struct SplitSpec {
  double test_fraction = 0.2;
  std::uint64_t seed = 42;
  bool stratified = true;
};

/// Row indices of a train/test partition, each list ascending.
struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded Fisher-Yates shuffle of row indices followed by a prefix cut of
/// floor(n * test_fraction) test rows. Stratified mode shuffles and cuts
/// each class separately; remainders stay in train.
SplitIndices split_indices(const DataTable& table, const SplitSpec& spec);

std::pair<DataTable, DataTable> split_train_test(const DataTable& table, const SplitSpec& spec);

enum class ScalerKind { none, min_max, z_score };

struct ColumnScale {
  double offset = 0.0;
  double scale = 1.0;

  friend bool operator==(const ColumnScale&, const ColumnScale&) = default;
};

/// Per-column affine map x -> (x - offset) / scale. Constant columns get
/// scale 1 and offset equal to the constant, so they map to 0.
struct ScalerParams {
  ScalerKind kind = ScalerKind::none;
  std::vector<ColumnScale> columns;

  friend bool operator==(const ScalerParams&, const ScalerParams&) = default;
};

ScalerParams fit_scaler(const DataTable& table, ScalerKind kind);
DataTable apply_scaler(const DataTable& table, const ScalerParams& params);

/// Scales one row in place; no-op for ScalerKind::none.
void apply_scaler(std::span<double> row, const ScalerParams& params);

std::string to_string(ScalerKind kind);
ScalerKind scaler_kind_from_string(const std::string& name);

}  // namespace iotids
