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

// Scenario files. The grammar is documented in docs/scenario-format.md.
//
// A scenario is a YAML mapping. Grid fields accept a scalar or a list; the
// runner takes their Cartesian product. An optional `variants` list holds
// partial scenarios that are deep-merged onto the base, each expanding to
// its own grid.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "rsense/optim.hpp"
#include "rsense/rip.hpp"

namespace rsense::experiments {

// A scenario field failed validation; the message names the field.
class ValidationError : public ParameterError {
 public:
  ValidationError(const std::string& field, const std::string& what)
      : ParameterError("scenario field '" + field + "': " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class ScenarioKind { kRecovery, kRip, kDeviation };
enum class Algorithm { kSubgd, kGd };

inline std::string_view to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::kRecovery:
      return "recovery";
    case ScenarioKind::kRip:
      return "rip";
    case ScenarioKind::kDeviation:
      return "deviation";
  }
  return "unknown";
}

inline std::string_view to_string(Algorithm a) { return a == Algorithm::kSubgd ? "subgd" : "gd"; }

struct SolverSpec {
  Algorithm algorithm = Algorithm::kSubgd;
  StepPolicy policy;
  friend bool operator==(const SolverSpec&, const SolverSpec&) = default;
};

// Line plots draw `value` against `x`, one line per distinct combination of
// the `series` columns. Heatmaps place `x` and `y` on the axes. Rows that
// share a point are aggregated: the median, or with `aggregate: success`
// the fraction of rows whose value is below `threshold`.
struct PlotSpec {
  std::string kind = "line";      // line | heatmap
  std::string source = "results";  // results | trace
  std::string x, y, value;
  std::vector<std::string> series;
  std::string aggregate = "median";  // median | success
  double threshold = 0.1;
  std::string facet;  // one figure per distinct value of this column
  std::string title;
};

// r_prime entries equal to kRankEqualsDim stand for r' = d.
inline constexpr int kRankEqualsDim = 0;

struct Scenario {
  std::string name;
  std::string variant;
  ScenarioKind kind = ScenarioKind::kRecovery;
  std::vector<int> d{20};
  std::vector<int> m{400};
  int r_star = 1;
  std::vector<int> r_prime{kRankEqualsDim};
  EnsembleKind ensemble = EnsembleKind::kGoe;

  std::vector<double> p{0.0};
  std::vector<NoiseDist> dist{NoiseDist::kGaussian};
  std::vector<double> noise_scale{1.0};
  bool scale_is_variance = false;

  InitSpec init{InitKind::kSpectral, 0.01};
  std::vector<SolverSpec> solvers{SolverSpec{}};
  int T = 1000;

  std::vector<int> rank{1};
  std::vector<RipKind> certifiers{RipKind::kL2, RipKind::kL1L2, RipKind::kSign};
  int n_samples = 200;

  int trials = 1;
  std::uint64_t base_seed = 0;
  std::string output_dir;
  bool trace = false;
  std::vector<PlotSpec> plots;

  std::vector<Scenario> variants;

  // The runnable pieces: the variants, or the scenario itself.
  std::vector<Scenario> expand() const {
    if (variants.empty()) return {*this};
    return variants;
  }

  int resolve_r_prime(int entry, int dim) const { return entry == kRankEqualsDim ? dim : entry; }

  void validate() const;
};

namespace detail {

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "name",  "kind",      "d",          "m",         "r_star",  "r_prime", "ensemble",
      "noise", "init",      "solvers",    "T",         "rank",    "certifiers",
      "n_samples", "trials", "base_seed", "output_dir", "trace",  "plots",   "variants",
      "variant", "description"};
  return keys;
}

template <class T>
T scalar(const YAML::Node& node, const std::string& field) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception& e) {
    throw ValidationError(field, "cannot parse value (" + std::string(e.what()) + ")");
  }
}

template <class T, class Convert>
std::vector<T> list(const YAML::Node& node, const std::string& field, Convert&& convert) {
  std::vector<T> out;
  if (node.IsSequence()) {
    for (std::size_t i = 0; i < node.size(); ++i)
      out.push_back(convert(node[i], field + "[" + std::to_string(i) + "]"));
  } else if (node.IsScalar()) {
    out.push_back(convert(node, field));
  } else {
    throw ValidationError(field, "expected a scalar or a list");
  }
  if (out.empty()) throw ValidationError(field, "grid must not be empty");
  return out;
}

template <class T>
std::vector<T> scalar_list(const YAML::Node& node, const std::string& field) {
  return list<T>(node, field, [](const YAML::Node& n, const std::string& f) { return scalar<T>(n, f); });
}

template <class Fn>
auto wrap(const std::string& field, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ValidationError&) {
    throw;
  } catch (const ParameterError& e) {
    throw ValidationError(field, e.what());
  }
}

inline SolverSpec parse_solver(const YAML::Node& node, const std::string& field) {
  if (!node.IsMap()) throw ValidationError(field, "expected a mapping");
  SolverSpec s;
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (key != "algorithm" && key != "policy" && key != "eta0" && key != "rho")
      throw ValidationError(field + "." + key, "unknown key");
  }
  if (node["algorithm"]) {
    const auto a = scalar<std::string>(node["algorithm"], field + ".algorithm");
    if (a == "subgd")
      s.algorithm = Algorithm::kSubgd;
    else if (a == "gd")
      s.algorithm = Algorithm::kGd;
    else
      throw ValidationError(field + ".algorithm", "expected subgd or gd, got '" + a + "'");
  }
  if (node["policy"])
    s.policy.kind = wrap(field + ".policy", [&] {
      return parse_step_kind(scalar<std::string>(node["policy"], field + ".policy"));
    });
  if (node["eta0"]) s.policy.eta0 = scalar<double>(node["eta0"], field + ".eta0");
  if (node["rho"]) s.policy.rho = scalar<double>(node["rho"], field + ".rho");
  wrap(field, [&] { s.policy.validate(); });
  return s;
}

inline PlotSpec parse_plot(const YAML::Node& node, const std::string& field) {
  if (!node.IsMap()) throw ValidationError(field, "expected a mapping");
  PlotSpec p;
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    const std::string f = field + "." + key;
    if (key == "series") {
      p.series = scalar_list<std::string>(kv.second, f);
      continue;
    }
    if (key == "threshold") {
      p.threshold = scalar<double>(kv.second, f);
      continue;
    }
    const auto value = scalar<std::string>(kv.second, f);
    if (key == "kind")
      p.kind = value;
    else if (key == "x")
      p.x = value;
    else if (key == "y")
      p.y = value;
    else if (key == "value")
      p.value = value;
    else if (key == "source")
      p.source = value;
    else if (key == "aggregate")
      p.aggregate = value;
    else if (key == "title")
      p.title = value;
    else if (key == "facet")
      p.facet = value;
    else
      throw ValidationError(f, "unknown key");
  }
  if (p.kind != "line" && p.kind != "heatmap")
    throw ValidationError(field + ".kind", "expected line or heatmap");
  if (p.source != "results" && p.source != "trace")
    throw ValidationError(field + ".source", "expected results or trace");
  if (p.aggregate != "median" && p.aggregate != "success")
    throw ValidationError(field + ".aggregate", "expected median or success");
  if (p.x.empty()) throw ValidationError(field + ".x", "required");
  if (p.value.empty()) throw ValidationError(field + ".value", "required");
  if (p.kind == "heatmap" && p.y.empty()) throw ValidationError(field + ".y", "required for heatmaps");
  return p;
}

// Deep merge: mappings merge key by key, everything else is replaced.
inline YAML::Node merged(const YAML::Node& base, const YAML::Node& over) {
  if (!base.IsMap() || !over.IsMap()) return YAML::Clone(over);
  YAML::Node out = YAML::Clone(base);
  for (const auto& kv : over) {
    const auto key = kv.first.as<std::string>();
    if (out[key] && out[key].IsMap() && kv.second.IsMap())
      out[key] = merged(out[key], kv.second);
    else
      out[key] = YAML::Clone(kv.second);
  }
  return out;
}

inline Scenario parse_flat(const YAML::Node& root) {
  if (!root.IsMap()) throw ValidationError("<root>", "scenario must be a mapping");
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (!known_keys().contains(key)) throw ValidationError(key, "unknown key");
  }
  Scenario s;
  if (!root["name"]) throw ValidationError("name", "required");
  s.name = scalar<std::string>(root["name"], "name");
  if (s.name.empty() || s.name.find_first_of("/\\ ,") != std::string::npos)
    throw ValidationError("name", "must be non-empty without spaces, commas or slashes");
  if (root["variant"]) s.variant = scalar<std::string>(root["variant"], "variant");

  if (root["kind"]) {
    const auto k = scalar<std::string>(root["kind"], "kind");
    if (k == "recovery")
      s.kind = ScenarioKind::kRecovery;
    else if (k == "rip")
      s.kind = ScenarioKind::kRip;
    else if (k == "deviation")
      s.kind = ScenarioKind::kDeviation;
    else
      throw ValidationError("kind", "expected recovery, rip or deviation, got '" + k + "'");
  }
  if (root["d"]) s.d = scalar_list<int>(root["d"], "d");
  if (root["m"]) s.m = scalar_list<int>(root["m"], "m");
  if (root["r_star"]) s.r_star = scalar<int>(root["r_star"], "r_star");
  if (root["r_prime"])
    s.r_prime = list<int>(root["r_prime"], "r_prime", [](const YAML::Node& n, const std::string& f) {
      if (n.IsScalar() && n.Scalar() == "d") return kRankEqualsDim;
      const int v = scalar<int>(n, f);
      if (v < 1) throw ValidationError(f, "must be a positive integer or 'd'");
      return v;
    });
  if (root["ensemble"]) {
    const auto e = scalar<std::string>(root["ensemble"], "ensemble");
    if (e == "goe")
      s.ensemble = EnsembleKind::kGoe;
    else if (e == "iid")
      s.ensemble = EnsembleKind::kIidSymmetric;
    else
      throw ValidationError("ensemble", "expected goe or iid");
  }

  if (const YAML::Node noise = root["noise"]) {
    if (!noise.IsMap()) throw ValidationError("noise", "expected a mapping");
    for (const auto& kv : noise) {
      const auto key = kv.first.as<std::string>();
      if (key != "p" && key != "dist" && key != "scale" && key != "variance")
        throw ValidationError("noise." + key, "unknown key");
    }
    if (noise["p"]) s.p = scalar_list<double>(noise["p"], "noise.p");
    if (noise["dist"])
      s.dist = list<NoiseDist>(noise["dist"], "noise.dist",
                               [](const YAML::Node& n, const std::string& f) {
                                 return wrap(f, [&] {
                                   return parse_noise_dist(scalar<std::string>(n, f));
                                 });
                               });
    if (noise["scale"] && noise["variance"])
      throw ValidationError("noise", "give either scale or variance, not both");
    if (noise["scale"]) s.noise_scale = scalar_list<double>(noise["scale"], "noise.scale");
    if (noise["variance"]) {
      s.noise_scale = scalar_list<double>(noise["variance"], "noise.variance");
      s.scale_is_variance = true;
    }
  }

  if (const YAML::Node init = root["init"]) {
    if (!init.IsMap()) throw ValidationError("init", "expected a mapping");
    for (const auto& kv : init) {
      const auto key = kv.first.as<std::string>();
      if (key != "kind" && key != "scale") throw ValidationError("init." + key, "unknown key");
    }
    if (init["kind"])
      s.init.kind = wrap("init.kind", [&] {
        return parse_init_kind(scalar<std::string>(init["kind"], "init.kind"));
      });
    if (init["scale"]) s.init.scale = scalar<double>(init["scale"], "init.scale");
  }

  if (const YAML::Node solvers = root["solvers"]) {
    if (!solvers.IsSequence()) throw ValidationError("solvers", "expected a list");
    s.solvers.clear();
    for (std::size_t i = 0; i < solvers.size(); ++i)
      s.solvers.push_back(parse_solver(solvers[i], "solvers[" + std::to_string(i) + "]"));
  }
  if (root["T"]) s.T = scalar<int>(root["T"], "T");
  if (root["rank"]) s.rank = scalar_list<int>(root["rank"], "rank");
  if (root["certifiers"])
    s.certifiers = list<RipKind>(root["certifiers"], "certifiers",
                                 [](const YAML::Node& n, const std::string& f) {
                                   return wrap(f, [&] {
                                     return parse_rip_kind(scalar<std::string>(n, f));
                                   });
                                 });
  if (root["n_samples"]) s.n_samples = scalar<int>(root["n_samples"], "n_samples");
  if (root["trials"]) s.trials = scalar<int>(root["trials"], "trials");
  if (root["base_seed"]) s.base_seed = scalar<std::uint64_t>(root["base_seed"], "base_seed");
  if (root["output_dir"]) s.output_dir = scalar<std::string>(root["output_dir"], "output_dir");
  if (root["trace"]) s.trace = scalar<bool>(root["trace"], "trace");
  if (const YAML::Node plots = root["plots"]) {
    if (!plots.IsSequence()) throw ValidationError("plots", "expected a list");
    for (std::size_t i = 0; i < plots.size(); ++i)
      s.plots.push_back(parse_plot(plots[i], "plots[" + std::to_string(i) + "]"));
  }
  return s;
}

}  // namespace detail

inline void Scenario::validate() const {
  using detail::wrap;
  auto positive = [](const std::vector<int>& v, const std::string& field) {
    for (int x : v)
      if (x < 1) throw ValidationError(field, "entries must be positive");
  };
  positive(d, "d");
  positive(m, "m");
  if (trials < 1) throw ValidationError("trials", "must be at least 1");
  for (double x : p)
    if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("noise.p", "entries must lie in [0, 1]");
  for (double x : noise_scale)
    if (!(x >= 0.0) || !std::isfinite(x))
      throw ValidationError(scale_is_variance ? "noise.variance" : "noise.scale",
                            "entries must be finite and non-negative");
  switch (kind) {
    case ScenarioKind::kRecovery:
      if (r_star < 1) throw ValidationError("r_star", "must be at least 1");
      for (int dim : d)
        if (r_star > dim) throw ValidationError("r_star", "exceeds dimension d");
      for (int rp : r_prime)
        for (int dim : d)
          if (resolve_r_prime(rp, dim) > dim)
            throw ValidationError("r_prime", "exceeds dimension d");
      if (T < 0) throw ValidationError("T", "must be non-negative");
      if (solvers.empty()) throw ValidationError("solvers", "needs at least one solver");
      wrap("init", [&] { init.validate(); });
      break;
    case ScenarioKind::kRip:
      positive(rank, "rank");
      for (int r : rank)
        for (int dim : d)
          if (r > dim) throw ValidationError("rank", "exceeds dimension d");
      if (certifiers.empty()) throw ValidationError("certifiers", "needs at least one certifier");
      [[fallthrough]];
    case ScenarioKind::kDeviation:
      if (n_samples < 1) throw ValidationError("n_samples", "must be at least 1");
      break;
  }
  for (const Scenario& v : variants) v.validate();
}

// Parses a scenario document. Variants are resolved here: each entry is
// merged onto the base document (without its `variants` key).
inline Scenario parse_scenario(const YAML::Node& root) {
  if (!root.IsMap()) throw ValidationError("<root>", "scenario must be a mapping");
  YAML::Node base = YAML::Clone(root);
  YAML::Node variant_nodes;
  if (root["variants"]) {
    variant_nodes = root["variants"];
    base.remove("variants");
    if (!variant_nodes.IsSequence() || variant_nodes.size() == 0)
      throw ValidationError("variants", "expected a non-empty list");
  }
  Scenario s = detail::parse_flat(base);
  if (variant_nodes) {
    std::set<std::string> labels;
    for (std::size_t i = 0; i < variant_nodes.size(); ++i) {
      const std::string field = "variants[" + std::to_string(i) + "]";
      const YAML::Node v = variant_nodes[i];
      if (!v.IsMap()) throw ValidationError(field, "expected a mapping");
      if (!v["variant"]) throw ValidationError(field + ".variant", "required label");
      if (v["variants"] || v["name"]) throw ValidationError(field, "may not set name or variants");
      Scenario sub = detail::parse_flat(detail::merged(base, v));
      if (!labels.insert(sub.variant).second)
        throw ValidationError(field + ".variant", "duplicate label '" + sub.variant + "'");
      s.variants.push_back(std::move(sub));
    }
  }
  s.validate();
  return s;
}

// `key=value` with a dotted key path; the value is parsed as YAML, so
// lists (m=[100,200]) and mappings are accepted.
inline void apply_override(YAML::Node& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ValidationError(assignment, "override must have the form key=value");
  const std::string path = assignment.substr(0, eq);
  YAML::Node value;
  try {
    value = YAML::Load(assignment.substr(eq + 1));
  } catch (const YAML::Exception& e) {
    throw ValidationError(path, std::string("cannot parse override value: ") + e.what());
  }
  std::vector<std::string> keys;
  std::stringstream ss(path);
  for (std::string part; std::getline(ss, part, '.');) keys.push_back(part);
  YAML::Node cur = root;
  for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
    if (!cur[keys[i]] || !cur[keys[i]].IsMap()) cur[keys[i]] = YAML::Node(YAML::NodeType::Map);
    YAML::Node next = cur[keys[i]];
    cur.reset(next);
  }
  cur[keys.back()] = value;
}

inline Scenario load_scenario_text(const std::string& text,
                                   const std::vector<std::string>& overrides = {}) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ValidationError("<file>", std::string("malformed YAML: ") + e.what());
  }
  for (const std::string& o : overrides) apply_override(root, o);
  return parse_scenario(root);
}

inline Scenario load_scenario(const std::filesystem::path& path,
                              const std::vector<std::string>& overrides = {}) {
  std::ifstream in(path);
  if (!in) throw ValidationError("<file>", "cannot open scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return load_scenario_text(buf.str(), overrides);
}

}  // namespace rsense::experiments
