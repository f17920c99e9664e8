// Copyright 2026 The rsense Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Long-format string tables with CSV I/O and order statistics.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rsense/core.hpp"

namespace rsense::experiments {

using Row = std::vector<std::string>;

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<Row> rows;

  bool empty() const { return rows.empty(); }

  // Index of `name`, or -1.
  int find(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    return it == columns.end() ? -1 : static_cast<int>(it - columns.begin());
  }

  int index(const std::string& name) const {
    const int i = find(name);
    if (i < 0) throw ParameterError("table has no column '" + name + "'");
    return i;
  }

  const std::string& at(std::size_t row, const std::string& column) const {
    return rows.at(row).at(static_cast<std::size_t>(index(column)));
  }

  double number(std::size_t row, const std::string& column) const;

  // Rows whose `column` equals `value`.
  ResultTable where(const std::string& column, const std::string& value) const {
    const int c = index(column);
    ResultTable out{columns, {}};
    for (const Row& r : rows)
      if (r[static_cast<std::size_t>(c)] == value) out.rows.push_back(r);
    return out;
  }

  std::vector<double> numbers(const std::string& column) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out.push_back(number(i, column));
    return out;
  }

  void write_csv(std::ostream& os) const;
  void write_csv(const std::filesystem::path& path) const;
};

inline double parse_number(const std::string& text) {
  if (text == "nan" || text.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ParameterError("not a number: '" + text + "'");
  return v;
}

inline double ResultTable::number(std::size_t row, const std::string& column) const {
  return parse_number(at(row, column));
}

// Cells never contain quotes or newlines; commas are replaced so every
// line splits cleanly.
inline std::string csv_cell(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  return s;
}

inline std::string join_row(const Row& row) {
  std::string out;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += ',';
    out += csv_cell(row[i]);
  }
  return out;
}

inline Row split_row(const std::string& line) {
  Row out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline void ResultTable::write_csv(std::ostream& os) const {
  os << join_row(columns) << '\n';
  for (const Row& r : rows) os << join_row(r) << '\n';
}

inline void ResultTable::write_csv(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  write_csv(out);
}

inline ResultTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("cannot open CSV file " + path.string());
  ResultTable t;
  std::string line;
  if (!std::getline(in, line)) return t;
  t.columns = split_row(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    Row r = split_row(line);
    if (r.size() != t.columns.size())
      throw ParameterError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                           std::to_string(t.columns.size()) + " cells, got " +
                           std::to_string(r.size()));
    t.rows.push_back(std::move(r));
  }
  return t;
}

// Linear-interpolation quantile of the finite entries (NaN if none).
inline double quantile(std::vector<double> v, double q) {
  std::erase_if(v, [](double x) { return std::isnan(x); });
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return v[lo];
  return v[lo] + frac * (v[hi] - v[lo]);
}

inline double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

inline double mean(const std::vector<double>& v) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double x : v)
    if (!std::isnan(x)) {
      sum += x;
      ++n;
    }
  return n == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(n);
}

// Groups rows by `keys` (first-appearance order) and reports median, q25,
// q75, IQR and mean of each metric, plus the group size.
inline ResultTable summarize(const ResultTable& t, const std::vector<std::string>& keys,
                             const std::vector<std::string>& metrics) {
  ResultTable out;
  out.columns = keys;
  out.columns.push_back("n");
  for (const auto& m : metrics)
    for (const char* suffix : {"_median", "_q25", "_q75", "_iqr", "_mean"}) out.columns.push_back(m + suffix);

  std::vector<int> key_idx;
  for (const auto& k : keys) key_idx.push_back(t.index(k));
  std::vector<Row> order;
  std::map<Row, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    Row key;
    for (int k : key_idx) key.push_back(t.rows[i][static_cast<std::size_t>(k)]);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(i);
  }
  for (const Row& key : order) {
    const auto& members = groups.at(key);
    Row r = key;
    r.push_back(std::to_string(members.size()));
    for (const auto& m : metrics) {
      std::vector<double> v;
      for (std::size_t i : members) v.push_back(t.number(i, m));
      const double q25 = quantile(v, 0.25);
      const double q75 = quantile(v, 0.75);
      r.push_back(format_double(median(v)));
      r.push_back(format_double(q25));
      r.push_back(format_double(q75));
      r.push_back(format_double(q75 - q25));
      r.push_back(format_double(mean(v)));
    }
    out.rows.push_back(std::move(r));
  }
  return out;
}

}  // namespace rsense::experiments
