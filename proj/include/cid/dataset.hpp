/*
 * Copyright 2026 The CID Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "cid/error.hpp"
#include "cid/log.hpp"
#include "cid/matrix.hpp"
#include "cid/random.hpp"

namespace cid {

// Column metadata. min/max/mean/std are the statistics used for
// counterfactual sampling ranges and for mean-value masking.
struct FeatureSpec {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  std::size_t index = 0;

  double range() const { return max - min; }

  friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

// Computes FeatureSpec statistics for every column of `rows`. Constant
// columns get mean == min == max and std == 0 exactly.
inline std::vector<FeatureSpec> compute_feature_specs(
    const std::vector<std::string>& names, const RowMatrix& rows) {
  if (names.size() != rows.cols()) {
    throw std::invalid_argument("compute_feature_specs: " +
                                std::to_string(names.size()) + " names for " +
                                std::to_string(rows.cols()) + " columns");
  }
  if (rows.empty()) throw DataError("cannot compute statistics of an empty table");
  std::vector<FeatureSpec> specs(rows.cols());
  const double n = static_cast<double>(rows.rows());
  for (std::size_t j = 0; j < rows.cols(); ++j) {
    FeatureSpec& f = specs[j];
    f.name = names[j];
    f.index = j;
    f.min = f.max = rows(0, j);
    double sum = 0.0;
    for (std::size_t i = 0; i < rows.rows(); ++i) {
      const double v = rows(i, j);
      f.min = std::min(f.min, v);
      f.max = std::max(f.max, v);
      sum += v;
    }
    if (f.min == f.max) {
      f.mean = f.min;
      f.std = 0.0;
      continue;
    }
    f.mean = std::clamp(sum / n, f.min, f.max);
    double ss = 0.0;
    for (std::size_t i = 0; i < rows.rows(); ++i) {
      const double dv = rows(i, j) - f.mean;
      ss += dv * dv;
    }
    f.std = std::sqrt(ss / n);
  }
  return specs;
}

// Tabular binary-classification data. Immutable after construction.
class DatasetTable {
 public:
  // Statistics are computed from `rows`.
  DatasetTable(std::vector<std::string> names, RowMatrix rows,
               std::vector<int> labels)
      : rows_(std::move(rows)), labels_(std::move(labels)) {
    validate(names.size());
    features_ = compute_feature_specs(names, rows_);
  }

  // Statistics are taken from `frozen` (e.g. a training split) instead of
  // being recomputed from `rows`.
  DatasetTable(std::vector<FeatureSpec> frozen, RowMatrix rows,
               std::vector<int> labels)
      : features_(std::move(frozen)), rows_(std::move(rows)),
        labels_(std::move(labels)) {
    validate(features_.size());
  }

  const std::vector<FeatureSpec>& features() const { return features_; }
  const FeatureSpec& feature(std::size_t i) const { return features_.at(i); }
  const RowMatrix& rows() const { return rows_; }
  std::span<const double> row(std::size_t i) const { return rows_.row(i); }
  const std::vector<int>& labels() const { return labels_; }
  std::size_t d() const { return features_.size(); }
  std::size_t size() const { return rows_.rows(); }

  std::vector<std::string> feature_names() const {
    std::vector<std::string> out;
    for (const auto& f : features_) out.push_back(f.name);
    return out;
  }

  std::vector<double> means() const {
    std::vector<double> out;
    for (const auto& f : features_) out.push_back(f.mean);
    return out;
  }

  // Indices of features whose observed range is zero.
  std::vector<std::size_t> constant_features() const {
    std::vector<std::size_t> out;
    for (const auto& f : features_) {
      if (f.min == f.max) out.push_back(f.index);
    }
    return out;
  }

 private:
  void validate(std::size_t d) const {
    if (d == 0) throw DataError("table has no feature columns");
    if (rows_.cols() != d) {
      throw DataError("table rows have " + std::to_string(rows_.cols()) +
                      " columns, expected " + std::to_string(d));
    }
    if (labels_.size() != rows_.rows()) {
      throw DataError("label count " + std::to_string(labels_.size()) +
                      " does not match row count " +
                      std::to_string(rows_.rows()));
    }
    for (double v : rows_.data()) {
      if (!std::isfinite(v)) throw DataError("table contains a non-finite value");
    }
    for (int y : labels_) {
      if (y != 0 && y != 1) throw DataError("labels must be 0 or 1");
    }
  }

  std::vector<FeatureSpec> features_;
  RowMatrix rows_;
  std::vector<int> labels_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::string_view unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

// Parses a full cell as a finite double; returns false on any failure.
inline bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace detail

// Parses CSV text with a header row. `source` is only used in messages.
inline DatasetTable parse_csv(std::istream& in, const std::string& label_column,
                              const std::string& source = "<csv>") {
  std::string line;
  if (!std::getline(in, line)) throw DataError(source + ": missing header row");
  // Owned copies: `line` is reused for the data rows.
  std::vector<std::string> header;
  for (auto cell : detail::split_csv_line(line)) header.emplace_back(detail::unquote(cell));
  std::size_t label_pos = header.size();
  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& name = header[c];
    if (name == label_column) {
      label_pos = c;
    } else {
      names.push_back(name);
    }
  }
  if (label_pos == header.size()) {
    throw DataError(source + ": label column '" + label_column + "' not found");
  }
  RowMatrix rows(names.size());
  std::vector<int> labels;
  std::vector<double> values(names.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv_line(line);
    const std::size_t row_no = labels.size() + 1;
    if (cells.size() != header.size()) {
      throw DataError(source + ": row " + std::to_string(row_no) + " (line " +
                      std::to_string(line_no) + ") has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(header.size()));
    }
    std::size_t out = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      const std::string& column = header[c];
      if (cells[c].empty()) {
        throw DataError(source + ": row " + std::to_string(row_no) + " (line " +
                        std::to_string(line_no) + "), column '" + column +
                        "': missing value");
      }
      if (!detail::parse_double(cells[c], v)) {
        throw DataError(source + ": row " + std::to_string(row_no) + " (line " +
                        std::to_string(line_no) + "), column '" + column +
                        "': cannot parse '" + std::string(cells[c]) +
                        "' as a finite number");
      }
      if (c == label_pos) {
        if (v != 0.0 && v != 1.0) {
          throw DataError(source + ": row " + std::to_string(row_no) +
                          " (line " + std::to_string(line_no) +
                          "), label column '" + column + "': value '" +
                          std::string(cells[c]) + "' is not 0 or 1");
        }
        labels.push_back(static_cast<int>(v));
      } else {
        values[out++] = v;
      }
    }
    rows.append_row(values);
  }
  if (labels.size() < 2) {
    throw DataError(source + ": need at least 2 data rows, found " +
                    std::to_string(labels.size()));
  }
  DatasetTable table(std::move(names), std::move(rows), std::move(labels));
  for (std::size_t j : table.constant_features()) {
    log().warn("{}: feature '{}' is constant ({})", source, table.feature(j).name,
               table.feature(j).min);
  }
  return table;
}

inline DatasetTable load_csv(const std::string& path,
                             const std::string& label_column = "label") {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file '" + path + "'");
  return parse_csv(in, label_column, path);
}

// Writes features followed by the label column; values use the shortest
// round-trip representation so reloading reproduces them exactly.
inline void write_csv(const DatasetTable& table, std::ostream& out,
                      const std::string& label_column = "label") {
  for (const auto& f : table.features()) out << f.name << ',';
  out << label_column << '\n';
  for (std::size_t i = 0; i < table.size(); ++i) {
    for (double v : table.row(i)) out << detail::format_double(v) << ',';
    out << table.labels()[i] << '\n';
  }
}

inline void write_csv(const DatasetTable& table, const std::string& path,
                      const std::string& label_column = "label") {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  write_csv(table, out, label_column);
}

// Deterministic train/test split. Rows keep their original relative order
// inside each split. The test split carries the training split's feature
// statistics, so masking and sampling never look at test rows.
inline std::pair<DatasetTable, DatasetTable> split(const DatasetTable& table,
                                                   double test_fraction,
                                                   std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("test fraction must lie in (0, 1)");
  }
  const std::size_t n = table.size();
  const auto n_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(n)));
  if (n < 2 || n_test == 0 || n_test >= n) {
    throw DataError("test fraction " + detail::format_double(test_fraction) +
                    " on " + std::to_string(n) +
                    " rows leaves an empty split");
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  shuffle(std::span<std::size_t>(perm), rng);
  std::vector<std::size_t> test_idx(perm.begin(), perm.begin() + n_test);
  std::vector<std::size_t> train_idx(perm.begin() + n_test, perm.end());
  std::sort(test_idx.begin(), test_idx.end());
  std::sort(train_idx.begin(), train_idx.end());

  auto take = [&](const std::vector<std::size_t>& idx) {
    RowMatrix rows(table.d());
    rows.reserve_rows(idx.size());
    std::vector<int> labels;
    for (std::size_t i : idx) {
      rows.append_row(table.row(i));
      labels.push_back(table.labels()[i]);
    }
    return std::make_pair(std::move(rows), std::move(labels));
  };
  auto [train_rows, train_labels] = take(train_idx);
  auto [test_rows, test_labels] = take(test_idx);
  DatasetTable train(table.feature_names(), std::move(train_rows),
                     std::move(train_labels));
  DatasetTable test(train.features(), std::move(test_rows),
                    std::move(test_labels));
  return {std::move(train), std::move(test)};
}

}  // namespace cid
