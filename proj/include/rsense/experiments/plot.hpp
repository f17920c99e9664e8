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

// Standalone SVG figures: line plots on a log-scale value axis and
// heatmaps. Each figure is written next to the CSV slice it plots.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rsense/experiments/scenario.hpp"
#include "rsense/experiments/table.hpp"

namespace rsense::experiments {

// Values below this are clipped before taking logs.
inline constexpr double kLogFloor = 1e-12;

namespace plot_detail {

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

inline std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

inline constexpr std::array<const char*, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                     "#9467bd", "#8c564b", "#e377c2", "#17becf"};

// Five anchor colors of a perceptually ordered dark-to-light ramp.
inline std::string ramp(double t) {
  static constexpr std::array<std::array<double, 3>, 5> stops{{{68, 1, 84},
                                                               {59, 82, 139},
                                                               {33, 145, 140},
                                                               {94, 201, 98},
                                                               {253, 231, 37}}};
  t = std::clamp(std::isnan(t) ? 0.0 : t, 0.0, 1.0) * 4.0;
  const int i = std::min(3, static_cast<int>(t));
  const double f = t - i;
  char buf[8];
  int rgb[3];
  for (int k = 0; k < 3; ++k)
    rgb[k] = static_cast<int>(std::lround(stops[i][k] + f * (stops[i + 1][k] - stops[i][k])));
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

inline std::vector<double> linear_ticks(double lo, double hi) {
  if (!(hi > lo)) return {lo};
  const double raw = (hi - lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double mult : {1.0, 2.0, 5.0, 10.0}) {
    step = mult * mag;
    if (raw <= step) break;
  }
  std::vector<double> out;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) out.push_back(v);
  return out;
}

// Aggregates `value` over rows sharing a key.
inline double aggregate(const std::vector<double>& v, const PlotSpec& spec) {
  if (spec.aggregate == "success") {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    double hits = 0.0;
    for (double x : v) hits += (x < spec.threshold) ? 1.0 : 0.0;
    return hits / static_cast<double>(v.size());
  }
  return median(v);
}

inline std::string series_label(const Row& key, const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < key.size(); ++i) {
    if (i) out += ", ";
    out += names[i] + "=" + key[i];
  }
  return out.empty() ? "all" : out;
}

// Numeric-aware ordering for category labels.
inline bool category_less(const std::string& a, const std::string& b) {
  double x = 0.0, y = 0.0;
  try {
    x = parse_number(a);
    y = parse_number(b);
    return x < y;
  } catch (const ParameterError&) {
    return a < b;
  }
}

struct Frame {
  double left = 80, right = 210, top = 40, bottom = 55;
  double width = 720, height = 440;
  double plot_w() const { return width - left - right; }
  double plot_h() const { return height - top - bottom; }
};

inline void svg_open(std::ostream& os, const Frame& f, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\""
     << f.height << "\" viewBox=\"0 0 " << f.width << ' ' << f.height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << f.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(title) << "</text>\n";
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

inline std::vector<std::filesystem::path> line_plot(const ResultTable& t, const PlotSpec& spec,
                                                    const std::filesystem::path& stem,
                                                    const std::string& title) {
  std::vector<int> series_idx;
  for (const auto& s : spec.series) series_idx.push_back(t.index(s));
  const int xi = t.index(spec.x);
  const int vi = t.index(spec.value);

  std::vector<Row> order;
  std::map<Row, std::map<double, std::vector<double>>> data;
  for (const Row& r : t.rows) {
    Row key;
    for (int k : series_idx) key.push_back(r[static_cast<std::size_t>(k)]);
    if (!data.contains(key)) order.push_back(key);
    data[key][parse_number(r[static_cast<std::size_t>(xi)])].push_back(
        parse_number(r[static_cast<std::size_t>(vi)]));
  }

  ResultTable slice;
  slice.columns = {"series", spec.x, spec.value};
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  std::vector<std::vector<std::pair<double, double>>> lines;
  for (const Row& key : order) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& [x, vals] : data[key]) {
      const double y = aggregate(vals, spec);
      slice.rows.push_back({csv_cell(series_label(key, spec.series)), format_double(x),
                            format_double(y)});
      if (std::isnan(y) || std::isnan(x)) continue;
      const double ly = std::log10(std::max(y, kLogFloor));
      pts.emplace_back(x, ly);
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, ly);
      ymax = std::max(ymax, ly);
    }
    lines.push_back(std::move(pts));
  }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = -1, ymax = 0;
  if (xmax == xmin) xmin -= 0.5, xmax += 0.5;
  ymin = std::floor(ymin);
  ymax = std::ceil(ymax);
  if (ymax == ymin) ymax += 1;

  Frame f;
  auto px = [&](double x) { return f.left + (x - xmin) / (xmax - xmin) * f.plot_w(); };
  auto py = [&](double ly) { return f.top + (ymax - ly) / (ymax - ymin) * f.plot_h(); };

  std::ostringstream svg;
  svg_open(svg, f, title);
  svg << "<rect x=\"" << f.left << "\" y=\"" << f.top << "\" width=\"" << f.plot_w()
      << "\" height=\"" << f.plot_h() << "\" fill=\"none\" stroke=\"black\"/>\n";
  const int decade_step = std::max(1, static_cast<int>(std::ceil((ymax - ymin) / 8.0)));
  for (int e = static_cast<int>(ymin); e <= static_cast<int>(ymax); e += decade_step) {
    const double y = py(e);
    svg << "<line x1=\"" << f.left << "\" y1=\"" << y << "\" x2=\"" << f.left + f.plot_w()
        << "\" y2=\"" << y << "\" stroke=\"#ddd\"/>\n";
    svg << "<text x=\"" << f.left - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">1e" << e
        << "</text>\n";
  }
  for (double x : linear_ticks(xmin, xmax)) {
    svg << "<line x1=\"" << px(x) << "\" y1=\"" << f.top + f.plot_h() << "\" x2=\"" << px(x)
        << "\" y2=\"" << f.top + f.plot_h() + 5 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << px(x) << "\" y=\"" << f.top + f.plot_h() + 18
        << "\" text-anchor=\"middle\">" << fmt(x) << "</text>\n";
  }
  svg << "<text x=\"" << f.left + f.plot_w() / 2 << "\" y=\"" << f.height - 12
      << "\" text-anchor=\"middle\">" << escape(spec.x) << "</text>\n";
  svg << "<text transform=\"translate(18," << f.top + f.plot_h() / 2
      << ") rotate(-90)\" text-anchor=\"middle\">" << escape(spec.value) << " (log10)</text>\n";
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const char* color = kPalette[i % kPalette.size()];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, ly] : lines[i]) svg << px(x) << ',' << py(ly) << ' ';
    svg << "\"/>\n";
    if (lines[i].size() <= 30)
      for (const auto& [x, ly] : lines[i])
        svg << "<circle cx=\"" << px(x) << "\" cy=\"" << py(ly) << "\" r=\"2.5\" fill=\"" << color
            << "\"/>\n";
    const double ly = f.top + 10 + 18.0 * static_cast<double>(i);
    const double lx = f.left + f.plot_w() + 12;
    svg << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 20 << "\" y2=\"" << ly
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << lx + 26 << "\" y=\"" << ly + 4 << "\" font-size=\"10\">"
        << escape(series_label(order[i], spec.series)) << "</text>\n";
  }
  svg << "</svg>\n";

  const auto svg_path = std::filesystem::path(stem.string() + ".svg");
  const auto csv_path = std::filesystem::path(stem.string() + ".csv");
  write_text(svg_path, svg.str());
  slice.write_csv(csv_path);
  return {svg_path, csv_path};
}

inline std::vector<std::filesystem::path> heatmap(const ResultTable& t, const PlotSpec& spec,
                                                  const std::filesystem::path& stem,
                                                  const std::string& title) {
  const int xi = t.index(spec.x);
  const int yi = t.index(spec.y);
  const int vi = t.index(spec.value);
  std::set<std::string, decltype(&category_less)> xs(&category_less), ys(&category_less);
  std::map<std::pair<std::string, std::string>, std::vector<double>> cells;
  for (const Row& r : t.rows) {
    const auto& x = r[static_cast<std::size_t>(xi)];
    const auto& y = r[static_cast<std::size_t>(yi)];
    xs.insert(x);
    ys.insert(y);
    cells[{x, y}].push_back(parse_number(r[static_cast<std::size_t>(vi)]));
  }
  const bool log_scale = spec.aggregate != "success";
  ResultTable slice;
  slice.columns = {spec.x, spec.y, spec.value};
  std::map<std::pair<std::string, std::string>, double> agg;
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& y : ys)
    for (const auto& x : xs) {
      const auto it = cells.find({x, y});
      const double v = it == cells.end() ? std::numeric_limits<double>::quiet_NaN()
                                         : aggregate(it->second, spec);
      agg[{x, y}] = v;
      slice.rows.push_back({x, y, format_double(v)});
      if (std::isnan(v)) continue;
      const double s = log_scale ? std::log10(std::max(v, kLogFloor)) : v;
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
  if (!log_scale) lo = 0.0, hi = 1.0;
  if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
  if (hi == lo) hi = lo + 1.0;

  Frame f;
  f.right = 120;
  const double cw = f.plot_w() / static_cast<double>(xs.size());
  const double ch = f.plot_h() / static_cast<double>(ys.size());
  std::ostringstream svg;
  svg_open(svg, f, title);
  std::size_t row = 0;
  // Larger y categories at the top.
  for (auto yit = ys.rbegin(); yit != ys.rend(); ++yit, ++row) {
    std::size_t col = 0;
    for (const auto& x : xs) {
      const double v = agg[{x, *yit}];
      const double s = log_scale ? std::log10(std::max(v, kLogFloor)) : v;
      const double cx = f.left + cw * static_cast<double>(col);
      const double cy = f.top + ch * static_cast<double>(row);
      svg << "<rect x=\"" << cx << "\" y=\"" << cy << "\" width=\"" << cw << "\" height=\"" << ch
          << "\" fill=\"" << (std::isnan(v) ? std::string("#cccccc") : ramp((s - lo) / (hi - lo)))
          << "\" stroke=\"white\"/>\n";
      const bool dark = std::isnan(v) || (s - lo) / (hi - lo) < 0.6;
      svg << "<text x=\"" << cx + cw / 2 << "\" y=\"" << cy + ch / 2 + 4
          << "\" text-anchor=\"middle\" font-size=\"10\" fill=\"" << (dark ? "white" : "black")
          << "\">" << (std::isnan(v) ? "n/a" : fmt(v, 3)) << "</text>\n";
      ++col;
    }
    svg << "<text x=\"" << f.left - 6 << "\" y=\"" << f.top + ch * (static_cast<double>(row) + 0.5) + 4
        << "\" text-anchor=\"end\">" << escape(*yit) << "</text>\n";
  }
  std::size_t col = 0;
  for (const auto& x : xs) {
    svg << "<text x=\"" << f.left + cw * (static_cast<double>(col) + 0.5) << "\" y=\""
        << f.top + f.plot_h() + 18 << "\" text-anchor=\"middle\">" << escape(x) << "</text>\n";
    ++col;
  }
  svg << "<text x=\"" << f.left + f.plot_w() / 2 << "\" y=\"" << f.height - 12
      << "\" text-anchor=\"middle\">" << escape(spec.x) << "</text>\n";
  svg << "<text transform=\"translate(18," << f.top + f.plot_h() / 2
      << ") rotate(-90)\" text-anchor=\"middle\">" << escape(spec.y) << "</text>\n";
  // Color bar.
  const double bx = f.left + f.plot_w() + 30;
  for (int k = 0; k < 50; ++k) {
    const double frac = 1.0 - k / 49.0;
    svg << "<rect x=\"" << bx << "\" y=\"" << f.top + k * f.plot_h() / 50.0 << "\" width=\"16\" height=\""
        << f.plot_h() / 50.0 + 0.5 << "\" fill=\"" << ramp(frac) << "\"/>\n";
  }
  auto bar_label = [&](double s) { return log_scale ? fmt(std::pow(10.0, s), 3) : fmt(s, 3); };
  svg << "<text x=\"" << bx + 22 << "\" y=\"" << f.top + 10 << "\">" << bar_label(hi) << "</text>\n";
  svg << "<text x=\"" << bx + 22 << "\" y=\"" << f.top + f.plot_h() << "\">" << bar_label(lo)
      << "</text>\n";
  svg << "<text x=\"" << bx << "\" y=\"" << f.top - 8 << "\" font-size=\"10\">"
      << escape(spec.aggregate == "success" ? "P(" + spec.value + " < " + fmt(spec.threshold) + ")"
                                            : spec.value)
      << "</text>\n";
  svg << "</svg>\n";

  const auto svg_path = std::filesystem::path(stem.string() + ".svg");
  const auto csv_path = std::filesystem::path(stem.string() + ".csv");
  write_text(svg_path, svg.str());
  slice.write_csv(csv_path);
  return {svg_path, csv_path};
}

}  // namespace plot_detail

// Writes one SVG figure and its CSV slice per facet value. Returns the
// files written; an empty table writes nothing and warns on `warn`.
inline std::vector<std::filesystem::path> emit_plots(const ResultTable& table,
                                                     const PlotSpec& spec,
                                                     const std::filesystem::path& stem,
                                                     std::ostream* warn = &std::cerr) {
  if (table.empty()) {
    if (warn != nullptr) *warn << "warning: no rows to plot for " << stem.string() << "\n";
    return {};
  }
  std::vector<std::pair<std::string, ResultTable>> facets;
  if (spec.facet.empty()) {
    facets.emplace_back("", table);
  } else {
    const int fi = table.index(spec.facet);
    std::vector<std::string> values;
    for (const Row& r : table.rows)
      if (std::find(values.begin(), values.end(), r[static_cast<std::size_t>(fi)]) == values.end())
        values.push_back(r[static_cast<std::size_t>(fi)]);
    for (const auto& v : values) facets.emplace_back(v, table.where(spec.facet, v));
  }
  std::vector<std::filesystem::path> out;
  for (const auto& [value, part] : facets) {
    std::filesystem::path s = stem;
    std::string title = spec.title.empty() ? stem.filename().string() : spec.title;
    if (!value.empty()) {
      s += "-" + value;
      title += " (" + spec.facet + "=" + value + ")";
    }
    const auto files = spec.kind == "heatmap" ? plot_detail::heatmap(part, spec, s, title)
                                              : plot_detail::line_plot(part, spec, s, title);
    out.insert(out.end(), files.begin(), files.end());
  }
  return out;
}

}  // namespace rsense::experiments
