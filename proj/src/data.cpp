#include "iotids/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <unordered_set>

#include <fmt/format.h>

#include "iotids/error.hpp"
#include "iotids/random.hpp"

namespace iotids {

DataTable::DataTable(std::vector<std::string> feature_names, std::vector<double> values,
                     std::vector<Label> labels)
    : feature_names_(std::move(feature_names)), values_(std::move(values)), labels_(std::move(labels)) {
  if (values_.size() != labels_.size() * feature_names_.size()) {
    throw DataError(fmt::format("table shape mismatch: {} values for {} rows x {} columns", values_.size(),
                                labels_.size(), feature_names_.size()));
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] != 0 && labels_[i] != 1) {
      throw DataError(fmt::format("row {}: label {} outside {{0, 1}}", i, labels_[i]));
    }
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw DataError(fmt::format("row {}, column {}: non-finite value", i / cols(), i % cols()));
    }
  }
}

std::array<std::size_t, 2> DataTable::class_counts() const {
  std::array<std::size_t, 2> counts{0, 0};
  for (Label y : labels_) ++counts[static_cast<std::size_t>(y)];
  return counts;
}

DataTable DataTable::subset(std::span<const std::size_t> indices) const {
  std::vector<double> values;
  values.reserve(indices.size() * cols());
  std::vector<Label> labels;
  labels.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= rows()) throw std::out_of_range(fmt::format("row index {} out of range", i));
    auto r = row(i);
    values.insert(values.end(), r.begin(), r.end());
    labels.push_back(labels_[i]);
  }
  DataTable out;
  out.feature_names_ = feature_names_;
  out.values_ = std::move(values);
  out.labels_ = std::move(labels);
  return out;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Splits RFC-4180 records. Quoted fields may contain commas, doubled quotes
// and line breaks. Blank lines are skipped.
class CsvReader {
 public:
  CsvReader(std::string_view text, std::string source) : text_(text), source_(std::move(source)) {
    if (text_.starts_with("\xEF\xBB\xBF")) text_.remove_prefix(3);
  }

  bool next(std::vector<std::string>& fields) {
    fields.clear();
    while (pos_ < text_.size() && (text_[pos_] == '\n' || text_[pos_] == '\r')) {
      if (text_[pos_] == '\n') ++line_;
      ++pos_;
    }
    if (pos_ >= text_.size()) return false;
    record_line_ = line_;
    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    while (pos_ < text_.size()) {
      const char c = text_[pos_++];
      if (quoted) {
        if (c == '"') {
          if (pos_ < text_.size() && text_[pos_] == '"') {
            field.push_back('"');
            ++pos_;
          } else {
            quoted = false;
          }
        } else {
          if (c == '\n') ++line_;
          field.push_back(c);
        }
      } else if (c == '"' && trim(field).empty() && !was_quoted) {
        field.clear();
        quoted = true;
        was_quoted = true;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
        was_quoted = false;
      } else if (c == '\n' || c == '\r') {
        if (c == '\r' && pos_ < text_.size() && text_[pos_] == '\n') ++pos_;
        ++line_;
        break;
      } else {
        if (was_quoted && c != ' ' && c != '\t') {
          throw DataError(fmt::format("{}:{}: unexpected character after closing quote", source_, line_));
        }
        field.push_back(c);
      }
    }
    if (quoted) throw DataError(fmt::format("{}:{}: unterminated quoted field", source_, record_line_));
    fields.push_back(std::move(field));
    return true;
  }

  std::size_t record_line() const { return record_line_; }

 private:
  std::string_view text_;
  std::string source_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t record_line_ = 1;
};

}  // namespace

bool parse_number(std::string_view cell, double& out) {
  std::string_view s = trim(cell);
  if (s.empty()) return false;
  std::size_t i = 0;
  if (s[i] == '+' || s[i] == '-') ++i;
  std::size_t int_digits = 0;
  while (i < s.size() && is_digit(s[i])) ++i, ++int_digits;
  std::size_t frac_digits = 0;
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && is_digit(s[i])) ++i, ++frac_digits;
  }
  if (int_digits + frac_digits == 0) return false;
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    std::size_t exp_digits = 0;
    while (i < s.size() && is_digit(s[i])) ++i, ++exp_digits;
    if (exp_digits == 0) return false;
  }
  if (i != s.size()) return false;
  // from_chars rejects a leading '+'.
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) return false;
  out = value;
  return true;
}

DataTable parse_csv(std::string_view text, const std::string& label_column, const std::string& source) {
  CsvReader reader(text, source);
  std::vector<std::string> header;
  if (!reader.next(header)) throw DataError(fmt::format("{}: missing header row", source));
  for (auto& h : header) h = std::string(trim(h));

  std::unordered_set<std::string> seen;
  for (const auto& h : header) {
    if (!seen.insert(h).second) throw DataError(fmt::format("{}: duplicate header name '{}'", source, h));
  }
  if (header.size() < 2) throw DataError(fmt::format("{}: need at least one feature column and a label", source));

  std::size_t label_index = header.size() - 1;
  if (label_column != "last") {
    auto it = std::find(header.begin(), header.end(), label_column);
    if (it == header.end()) throw DataError(fmt::format("{}: label column '{}' not found", source, label_column));
    label_index = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != label_index) names.push_back(header[c]);
  }

  std::vector<double> values;
  std::vector<Label> labels;
  std::vector<std::string> fields;
  std::size_t row = 0;
  while (reader.next(fields)) {
    ++row;
    if (fields.size() != header.size()) {
      throw DataError(fmt::format("{}: row {} (line {}) has {} fields, expected {}", source, row,
                                  reader.record_line(), fields.size(), header.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      double v = 0.0;
      if (!parse_number(fields[c], v)) {
        throw DataError(fmt::format("{}: row {} (line {}), column '{}': cannot parse '{}' as a number", source,
                                    row, reader.record_line(), header[c], fields[c]));
      }
      if (c == label_index) {
        if (v != 0.0 && v != 1.0) {
          throw DataError(fmt::format("{}: row {} (line {}): label value '{}' outside {{0, 1}}", source, row,
                                      reader.record_line(), std::string(trim(fields[c]))));
        }
        labels.push_back(v == 1.0 ? 1 : 0);
      } else {
        values.push_back(v);
      }
    }
  }
  return DataTable(std::move(names), std::move(values), std::move(labels));
}

DataTable load_csv(const std::filesystem::path& path, const std::string& label_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open data file '{}'", path.string()));
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_csv(text, label_column, path.string());
}

// ---------------------------------------------------------------------------
// Splitting

namespace {

std::size_t test_count(std::size_t n, double fraction) {
  // The epsilon absorbs products such as 0.29 * 100 = 28.999999999999996.
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction + 1e-9));
}

}  // namespace

SplitIndices split_indices(const DataTable& table, const SplitSpec& spec) {
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
    throw std::invalid_argument(fmt::format("test_fraction must lie in (0, 1), got {}", spec.test_fraction));
  }
  if (table.empty()) throw DataError("cannot split an empty table");

  SplitIndices out;
  auto cut = [&](std::vector<std::size_t>& pool, std::uint64_t seed) {
    Rng rng(seed);
    rng.shuffle(std::span(pool));
    const std::size_t n_test = test_count(pool.size(), spec.test_fraction);
    out.test.insert(out.test.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_test));
    out.train.insert(out.train.end(), pool.begin() + static_cast<std::ptrdiff_t>(n_test), pool.end());
  };

  if (spec.stratified) {
    const auto counts = table.class_counts();
    if (counts[0] == 0 || counts[1] == 0) {
      throw DataError("stratified split requires both classes to be present");
    }
    for (Label c = 0; c <= 1; ++c) {
      std::vector<std::size_t> pool;
      for (std::size_t i = 0; i < table.rows(); ++i) {
        if (table.label(i) == c) pool.push_back(i);
      }
      cut(pool, derive_seed(spec.seed, static_cast<std::uint64_t>(c)));
    }
  } else {
    std::vector<std::size_t> pool(table.rows());
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
    cut(pool, spec.seed);
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::pair<DataTable, DataTable> split_train_test(const DataTable& table, const SplitSpec& spec) {
  const auto idx = split_indices(table, spec);
  return {table.subset(idx.train), table.subset(idx.test)};
}

// ---------------------------------------------------------------------------
// Scaling

ScalerParams fit_scaler(const DataTable& table, ScalerKind kind) {
  ScalerParams params;
  params.kind = kind;
  if (kind == ScalerKind::none) return params;
  if (table.empty()) throw DataError("cannot fit a scaler on an empty table");

  const std::size_t n = table.rows();
  params.columns.resize(table.cols());
  for (std::size_t c = 0; c < table.cols(); ++c) {
    double lo = table.at(0, c);
    double hi = lo;
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double v = table.at(r, c);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
    }
    ColumnScale& col = params.columns[c];
    if (lo == hi) {
      col = {lo, 1.0};
      continue;
    }
    if (kind == ScalerKind::min_max) {
      col = {lo, hi - lo};
    } else {
      const double mean = sum / static_cast<double>(n);
      double ss = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        const double d = table.at(r, c) - mean;
        ss += d * d;
      }
      const double sd = std::sqrt(ss / static_cast<double>(n));
      col = {mean, sd > 0.0 ? sd : 1.0};
    }
  }
  return params;
}

void apply_scaler(std::span<double> row, const ScalerParams& params) {
  if (params.kind == ScalerKind::none) return;
  if (row.size() != params.columns.size()) {
    throw std::invalid_argument(
        fmt::format("scaler has {} columns, row has {}", params.columns.size(), row.size()));
  }
  for (std::size_t c = 0; c < row.size(); ++c) {
    row[c] = (row[c] - params.columns[c].offset) / params.columns[c].scale;
  }
}

DataTable apply_scaler(const DataTable& table, const ScalerParams& params) {
  if (params.kind == ScalerKind::none) return table;
  if (table.cols() != params.columns.size()) {
    throw std::invalid_argument(
        fmt::format("scaler has {} columns, table has {}", params.columns.size(), table.cols()));
  }
  std::vector<double> values = table.values();
  for (std::size_t r = 0; r < table.rows(); ++r) {
    apply_scaler(std::span(values).subspan(r * table.cols(), table.cols()), params);
  }
  return DataTable(table.feature_names(), std::move(values), table.labels());
}

std::string to_string(ScalerKind kind) {
  switch (kind) {
    case ScalerKind::none: return "none";
    case ScalerKind::min_max: return "min_max";
    case ScalerKind::z_score: return "z_score";
  }
  return "none";
}

ScalerKind scaler_kind_from_string(const std::string& name) {
  if (name == "none") return ScalerKind::none;
  if (name == "min_max") return ScalerKind::min_max;
  if (name == "z_score") return ScalerKind::z_score;
  throw ConfigError(fmt::format("unknown scaling kind '{}'", name));
}

}  // namespace iotids
