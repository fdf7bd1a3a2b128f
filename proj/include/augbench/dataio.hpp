#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "augbench/apportion.hpp"
#include "augbench/log.hpp"
#include "augbench/matrix.hpp"
#include "augbench/rng.hpp"

namespace augbench {

enum class ColumnKind { numeric, categorical, identifier, label };

inline std::string_view to_string(ColumnKind k) {
  switch (k) {
    case ColumnKind::numeric: return "numeric";
    case ColumnKind::categorical: return "categorical";
    case ColumnKind::identifier: return "identifier";
    case ColumnKind::label: return "label";
  }
  return "?";
}

inline ColumnKind parse_column_kind(std::string_view s) {
  if (s == "numeric") return ColumnKind::numeric;
  if (s == "categorical") return ColumnKind::categorical;
  if (s == "identifier") return ColumnKind::identifier;
  if (s == "label") return ColumnKind::label;
  throw std::invalid_argument("unknown column kind '" + std::string(s) + "'");
}

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  bool operator==(const ColumnSpec&) const = default;
};

/// Column declaration for a CSV file. `label_values` lists the accepted label
/// spellings: the first maps to class 0, the second to class 1.
struct TableSchema {
  std::vector<ColumnSpec> columns;
  std::vector<std::string> label_values{"0", "1"};
  bool operator==(const TableSchema&) const = default;
};

struct RawTable {
  std::vector<std::string> column_names;
  std::vector<ColumnKind> column_kinds;
  std::vector<std::vector<std::string>> rows;
  std::size_t dropped_row_count = 0;
  std::vector<std::string> label_values{"0", "1"};

  std::size_t label_column() const {
    auto it = std::find(column_kinds.begin(), column_kinds.end(), ColumnKind::label);
    return static_cast<std::size_t>(it - column_kinds.begin());
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  s = s.substr(b, e - b + 1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

inline std::optional<double> parse_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace detail

/// Reads a CSV file whose header matches `schema`. Rows that have the wrong
/// cell count, blank cells, unparsable numerics, or undeclared label values
/// are dropped and counted.
inline RawTable load_table(const std::string& path, const TableSchema& schema) {
  const auto label_cols = std::count_if(schema.columns.begin(), schema.columns.end(),
                                        [](const ColumnSpec& c) { return c.kind == ColumnKind::label; });
  if (label_cols > 1) throw std::invalid_argument("schema declares more than one label column");
  if (label_cols == 0) throw std::invalid_argument("schema declares no label column");
  if (schema.label_values.size() != 2 || schema.label_values[0] == schema.label_values[1]) {
    throw std::invalid_argument("schema must declare exactly two distinct label values");
  }

  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("dataset '" + path + "' is empty");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = detail::split_csv_line(line);
  if (header.size() != schema.columns.size()) {
    throw std::invalid_argument("header of '" + path + "' has " + std::to_string(header.size()) +
                                " columns, schema declares " + std::to_string(schema.columns.size()));
  }
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] != schema.columns[i].name) {
      throw std::invalid_argument("header column " + std::to_string(i) + " is '" + header[i] +
                                  "', schema expects '" + schema.columns[i].name + "'");
    }
  }

  RawTable table;
  table.label_values = schema.label_values;
  for (const auto& c : schema.columns) {
    table.column_names.push_back(c.name);
    table.column_kinds.push_back(c.kind);
  }

  while (std::getline(in, line)) {
    auto cells = detail::split_csv_line(line);
    bool ok = cells.size() == schema.columns.size();
    for (std::size_t i = 0; ok && i < cells.size(); ++i) {
      switch (schema.columns[i].kind) {
        case ColumnKind::numeric: ok = detail::parse_double(cells[i]).has_value(); break;
        case ColumnKind::categorical: ok = !cells[i].empty(); break;
        case ColumnKind::label:
          ok = cells[i] == schema.label_values[0] || cells[i] == schema.label_values[1];
          break;
        case ColumnKind::identifier: break;
      }
    }
    if (ok) {
      table.rows.push_back(std::move(cells));
    } else {
      ++table.dropped_row_count;
    }
  }
  if (table.rows.empty()) throw std::runtime_error("dataset '" + path + "' has zero usable rows");
  return table;
}

/// One block of the design matrix: a z-scored numeric column (width 1) or the
/// one-hot expansion of a categorical column.
struct FeatureBlock {
  std::string column_name;
  ColumnKind kind = ColumnKind::numeric;
  std::size_t offset = 0;
  double mean = 0.0;
  double stddev = 1.0;
  std::vector<std::string> categories;

  std::size_t width() const { return kind == ColumnKind::numeric ? 1 : categories.size(); }

  std::optional<std::size_t> category_index(std::string_view value) const {
    auto it = std::find(categories.begin(), categories.end(), value);
    if (it == categories.end()) return std::nullopt;
    return static_cast<std::size_t>(it - categories.begin());
  }
};

struct PreprocessPlan {
  std::vector<std::string> column_names;
  std::vector<ColumnKind> column_kinds;
  std::vector<FeatureBlock> feature_order;
  std::vector<std::string> excluded_columns;
  std::vector<std::string> label_values{"0", "1"};

  std::size_t n_features() const {
    std::size_t n = 0;
    for (const auto& b : feature_order) n += b.width();
    return n;
  }

  std::vector<std::string> feature_names() const {
    std::vector<std::string> names;
    for (const auto& b : feature_order) {
      if (b.kind == ColumnKind::numeric) {
        names.push_back(b.column_name);
      } else {
        for (const auto& c : b.categories) names.push_back(b.column_name + "=" + c);
      }
    }
    return names;
  }
};

/// Learns z-score statistics (population std) and first-appearance category
/// maps from `table`. Constant columns are excluded and reported.
inline PreprocessPlan fit_preprocess(const RawTable& table) {
  if (table.rows.empty()) throw std::invalid_argument("fit_preprocess: empty table");
  PreprocessPlan plan;
  plan.column_names = table.column_names;
  plan.column_kinds = table.column_kinds;
  plan.label_values = table.label_values;
  const double n = static_cast<double>(table.rows.size());
  std::size_t offset = 0;
  for (std::size_t c = 0; c < table.column_names.size(); ++c) {
    FeatureBlock block;
    block.column_name = table.column_names[c];
    block.kind = table.column_kinds[c];
    if (block.kind == ColumnKind::numeric) {
      double sum = 0.0;
      for (const auto& r : table.rows) sum += *detail::parse_double(r[c]);
      block.mean = sum / n;
      double ss = 0.0;
      for (const auto& r : table.rows) {
        const double d = *detail::parse_double(r[c]) - block.mean;
        ss += d * d;
      }
      block.stddev = std::sqrt(ss / n);
      if (!(block.stddev > 1e-12 * (1.0 + std::abs(block.mean)))) {
        plan.excluded_columns.push_back(block.column_name);
        warn("column '" + block.column_name + "' has zero variance and is excluded");
        continue;
      }
    } else if (block.kind == ColumnKind::categorical) {
      for (const auto& r : table.rows) {
        if (!block.category_index(r[c])) block.categories.push_back(r[c]);
      }
      if (block.categories.size() < 2) {
        plan.excluded_columns.push_back(block.column_name);
        warn("column '" + block.column_name + "' has a single category and is excluded");
        continue;
      }
    } else {
      continue;
    }
    block.offset = offset;
    offset += block.width();
    plan.feature_order.push_back(std::move(block));
  }
  if (plan.feature_order.empty()) {
    throw std::invalid_argument("fit_preprocess: all feature columns were excluded");
  }
  return plan;
}

struct Dataset {
  FeatureMatrix features;
  LabelVector labels;
};

inline Dataset apply_preprocess(const RawTable& table, const PreprocessPlan& plan) {
  if (table.column_names != plan.column_names || table.column_kinds != plan.column_kinds) {
    throw std::invalid_argument("apply_preprocess: table columns do not match the plan");
  }
  const std::size_t label_col = table.label_column();
  std::map<std::size_t, std::size_t> source_of;  // block index -> table column
  for (std::size_t b = 0; b < plan.feature_order.size(); ++b) {
    auto it = std::find(table.column_names.begin(), table.column_names.end(),
                        plan.feature_order[b].column_name);
    source_of[b] = static_cast<std::size_t>(it - table.column_names.begin());
  }

  Dataset out{FeatureMatrix(table.rows.size(), plan.n_features()), LabelVector(table.rows.size())};
  std::set<std::string> unseen_reported;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    auto x = out.features.row(r);
    for (std::size_t b = 0; b < plan.feature_order.size(); ++b) {
      const auto& block = plan.feature_order[b];
      const auto& cell = row[source_of[b]];
      if (block.kind == ColumnKind::numeric) {
        const auto v = detail::parse_double(cell);
        if (!v) throw std::invalid_argument("apply_preprocess: non-numeric cell '" + cell + "'");
        x[block.offset] = (*v - block.mean) / block.stddev;
      } else if (auto idx = block.category_index(cell)) {
        x[block.offset + *idx] = 1.0;
      } else if (unseen_reported.insert(block.column_name + "=" + cell).second) {
        warn("unseen category '" + cell + "' in column '" + block.column_name +
             "' encoded as all zeros");
      }
    }
    const auto& lab = row[label_col];
    if (lab == plan.label_values[0]) {
      out.labels[r] = 0;
    } else if (lab == plan.label_values[1]) {
      out.labels[r] = 1;
    } else {
      throw std::invalid_argument("apply_preprocess: undeclared label value '" + lab + "'");
    }
  }
  return out;
}

inline RawTable select_table_rows(const RawTable& table, std::span<const std::size_t> indices) {
  RawTable out = table;
  out.rows.clear();
  out.dropped_row_count = 0;
  for (auto i : indices) out.rows.push_back(table.rows.at(i));
  return out;
}

struct SplitPair {
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
};

inline std::array<std::size_t, 2> class_counts(const LabelVector& labels) {
  std::array<std::size_t, 2> counts{0, 0};
  for (int y : labels) {
    if (y != 0 && y != 1) throw std::invalid_argument("labels must be 0 or 1");
    ++counts[static_cast<std::size_t>(y)];
  }
  return counts;
}

/// Per-class shuffle followed by a per-class cut. The test total is
/// round(test_fraction * n) distributed over classes by largest remainder.
inline SplitPair stratified_split(const LabelVector& labels, double test_fraction,
                                  const RngStream& rng) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("stratified_split: test_fraction must lie in (0, 1)");
  }
  const auto counts = class_counts(labels);
  for (int c = 0; c < 2; ++c) {
    if (counts[c] < 2) {
      throw std::invalid_argument("stratified_split: class " + std::to_string(c) +
                                  " has fewer than 2 rows");
    }
  }
  const auto total_test =
      static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(labels.size())));
  const std::array<double, 2> weights{static_cast<double>(counts[0]), static_cast<double>(counts[1])};
  const auto per_class = largest_remainder(weights, total_test);

  SplitPair split;
  for (int c = 0; c < 2; ++c) {
    if (per_class[c] < 1 || per_class[c] >= counts[c]) {
      throw std::invalid_argument("stratified_split: test_fraction leaves class " +
                                  std::to_string(c) + " without train or test rows");
    }
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == c) members.push_back(i);
    auto stream = rng.derive("class-" + std::to_string(c));
    stream.shuffle(members);
    split.test_indices.insert(split.test_indices.end(), members.begin(),
                              members.begin() + static_cast<std::ptrdiff_t>(per_class[c]));
    split.train_indices.insert(split.train_indices.end(),
                               members.begin() + static_cast<std::ptrdiff_t>(per_class[c]),
                               members.end());
  }
  std::sort(split.train_indices.begin(), split.train_indices.end());
  std::sort(split.test_indices.begin(), split.test_indices.end());
  return split;
}

inline SplitPair stratified_split(const FeatureMatrix& features, const LabelVector& labels,
                                  double test_fraction, const RngStream& rng) {
  if (features.rows() != labels.size()) {
    throw std::invalid_argument("stratified_split: features and labels differ in length");
  }
  return stratified_split(labels, test_fraction, rng);
}

// Encoded labels straight from the raw table, before any preprocessing.
inline LabelVector table_labels(const RawTable& table) {
  const std::size_t col = table.label_column();
  LabelVector out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    if (row[col] == table.label_values[0]) out.push_back(0);
    else if (row[col] == table.label_values[1]) out.push_back(1);
    else throw std::invalid_argument("undeclared label value '" + row[col] + "'");
  }
  return out;
}

inline LabelVector select_labels(const LabelVector& labels, std::span<const std::size_t> indices) {
  LabelVector out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(labels.at(i));
  return out;
}

/// Writes feature rows (normalized space) with a trailing label column. With
/// `round_one_hot`, each categorical block is snapped to its argmax category.
inline void write_feature_csv(std::ostream& os, const FeatureMatrix& features,
                              const LabelVector& labels, const PreprocessPlan& plan,
                              bool round_one_hot = true) {
  if (features.cols() != plan.n_features() || labels.size() != features.rows()) {
    throw std::invalid_argument("write_feature_csv: shape does not match plan");
  }
  std::string label_name = "label";
  for (std::size_t c = 0; c < plan.column_kinds.size(); ++c)
    if (plan.column_kinds[c] == ColumnKind::label) label_name = plan.column_names[c];
  for (const auto& name : plan.feature_names()) os << name << ',';
  os << label_name << '\n' << std::setprecision(17);
  std::vector<double> row;
  for (std::size_t r = 0; r < features.rows(); ++r) {
    auto src = features.row(r);
    row.assign(src.begin(), src.end());
    if (round_one_hot) {
      for (const auto& b : plan.feature_order) {
        if (b.kind != ColumnKind::categorical) continue;
        auto first = row.begin() + static_cast<std::ptrdiff_t>(b.offset);
        auto last = first + static_cast<std::ptrdiff_t>(b.width());
        auto best = std::max_element(first, last);
        const auto hot = best - first;
        for (auto it = first; it != last; ++it) *it = (it - first == hot) ? 1.0 : 0.0;
      }
    }
    for (double v : row) os << v << ',';
    os << labels[r] << '\n';
  }
}

}  // namespace augbench
