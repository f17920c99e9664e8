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

// Scenario execution.
//
// The grid is split into instances: one (variant, d, m, p, dist, scale,
// trial) tuple, whose ground truth, ensemble and noise are generated once
// and shared by every solver (or certifier) run on it. The instance seed is
// base_seed ^ trial; each random object draws from derive_seed(seed, salt).
// Instances run on a pool of worker threads; finished rows are appended to
// <out>/<name>/results.partial.csv as they arrive and the final CSV files
// are written sorted by grid position, so reruns are byte-identical.

#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include "rsense/diagnostics.hpp"
#include "rsense/experiments/plot.hpp"
#include "rsense/experiments/scenario.hpp"
#include "rsense/experiments/table.hpp"
#include "rsense/loss.hpp"
#include "rsense/optim.hpp"
#include "rsense/rip.hpp"

namespace rsense::experiments {

inline constexpr std::uint64_t kSaltTruth = 1;
inline constexpr std::uint64_t kSaltEnsemble = 2;
inline constexpr std::uint64_t kSaltNoise = 3;
inline constexpr std::uint64_t kSaltInit = 4;
inline constexpr std::uint64_t kSaltProbe = 5;
inline constexpr std::uint64_t kSaltPhi = 6;

// Recovery runs count as successes below this final error.
inline constexpr double kSuccessThreshold = 0.1;

struct RunConfig {
  std::filesystem::path out_dir;  // empty: keep everything in memory
  int threads = 1;
  std::optional<bool> trace;          // overrides the scenario's `trace`
  std::optional<std::uint64_t> seed;  // overrides `base_seed`
  std::ostream* log = nullptr;        // progress lines
};

struct ScenarioOutput {
  ResultTable results;
  ResultTable summary;
  ResultTable traces;  // empty unless tracing
  std::filesystem::path dir;
  std::vector<std::filesystem::path> plots;
};

inline std::uint64_t instance_seed(std::uint64_t base_seed, int trial) {
  return base_seed ^ static_cast<std::uint64_t>(trial);
}

inline NoiseSpec make_noise(const Scenario& s, double p, NoiseDist dist, double level,
                            std::uint64_t seed) {
  NoiseSpec n = s.scale_is_variance ? NoiseSpec::with_variance(p, dist, level, seed)
                                    : NoiseSpec{p, dist, level, seed};
  n.validate();
  return n;
}

namespace detail {

struct Instance {
  std::size_t ordinal = 0;
  const Scenario* scenario = nullptr;
  int d = 0, m = 0;
  double p = 0.0;
  NoiseDist dist = NoiseDist::kNone;
  double level = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
};

struct InstanceRows {
  std::vector<Row> results;
  std::vector<Row> traces;
};

inline std::string str(double v) { return format_double(v); }
inline std::string str(int v) { return std::to_string(v); }
inline std::string str(std::uint64_t v) { return std::to_string(v); }
inline std::string str(std::string_view v) { return std::string(v); }

inline const std::vector<std::string>& recovery_columns() {
  static const std::vector<std::string> c{
      "scenario", "variant",      "trial",        "seed",          "d",
      "m",        "r_star",       "r_prime",      "p",             "dist",
      "noise_scale", "noise_variance", "algorithm", "policy",      "eta0",
      "rho",      "init",         "alpha",        "T",             "iterations",
      "final_err", "final_loss_l1", "final_loss_l2", "final_signal_norm", "final_error_norm",
      "success",  "status",       "message"};
  return c;
}

inline const std::vector<std::string>& rip_columns() {
  static const std::vector<std::string> c{
      "scenario", "variant", "trial", "seed",      "kind",      "r",      "m",      "d",
      "p",        "sigma",   "n_samples", "delta_hat", "phi", "dist", "status", "message"};
  return c;
}

inline const std::vector<std::string>& deviation_columns() {
  static const std::vector<std::string> c{
      "scenario", "variant", "trial",      "seed",         "d",      "m",      "p",
      "dist",     "sigma",   "n_samples",  "deviation",    "noise_term", "l2_delta_hat",
      "status",   "message"};
  return c;
}

inline std::vector<std::string> trace_columns() {
  std::vector<std::string> c{"scenario", "variant", "trial",  "seed", "d",
                             "m",        "r_prime", "p",      "dist", "noise_scale",
                             "algorithm", "policy", "eta0",   "rho"};
  std::stringstream ss{std::string(RunRecord::kCsvHeader)};
  for (std::string col; std::getline(ss, col, ',');) c.push_back(col);
  return c;
}

inline Row iteration_cells(const IterationRow& r) {
  return {str(r.t),         str(r.eta),        str(r.loss_l1),    str(r.loss_l2), str(r.err_frob),
          str(r.signal_norm), str(r.error_norm), str(r.error_frob), str(r.q_frob)};
}

inline const std::string& nonempty(const std::string& s) {
  static const std::string dash = "-";
  return s.empty() ? dash : s;
}

inline InstanceRows run_recovery(const Instance& in, bool trace) {
  const Scenario& s = *in.scenario;
  InstanceRows out;
  const NoiseSpec noise_spec =
      make_noise(s, in.p, in.dist, in.level, derive_seed(in.seed, kSaltNoise));
  const double noise_scale = noise_spec.scale;
  const double noise_var = noise_spec.heavy_tailed() ? std::numeric_limits<double>::quiet_NaN()
                                                     : noise_spec.variance();

  auto base_cells = [&](int r_prime, const SolverSpec& solver) {
    return Row{s.name,
               nonempty(s.variant),
               str(in.trial),
               str(in.seed),
               str(in.d),
               str(in.m),
               str(s.r_star),
               str(r_prime),
               str(in.p),
               str(to_string(in.dist)),
               str(noise_scale),
               str(noise_var),
               str(to_string(solver.algorithm)),
               str(to_string(solver.policy.kind)),
               str(solver.policy.eta0),
               str(solver.policy.rho),
               str(to_string(s.init.kind)),
               str(s.init.scale),
               str(s.T)};
  };
  auto failed_row = [&](int r_prime, const SolverSpec& solver, const std::string& why) {
    Row row = base_cells(r_prime, solver);
    for (int k = 0; k < 6; ++k) row.push_back("nan");
    row.insert(row.end(), {"0", "failed", csv_cell(why)});
    row[19] = "0";  // iterations
    return row;
  };

  std::optional<GroundTruth> truth;
  std::optional<MeasurementEnsemble> ens;
  Vector y;
  try {
    truth = gen_ground_truth(in.d, s.r_star, true, derive_seed(in.seed, kSaltTruth));
    ens.emplace(in.d, in.m, derive_seed(in.seed, kSaltEnsemble), s.ensemble);
    y = measure(*ens, *truth, gen_noise(in.m, noise_spec));
  } catch (const std::exception& e) {
    for (int rp : s.r_prime)
      for (const SolverSpec& solver : s.solvers)
        out.results.push_back(failed_row(s.resolve_r_prime(rp, in.d), solver, e.what()));
    return out;
  }

  for (int rp_entry : s.r_prime) {
    const int r_prime = s.resolve_r_prime(rp_entry, in.d);
    std::optional<Matrix> u0;
    std::string init_error;
    try {
      u0 = initialize(s.init, *ens, y, r_prime, derive_seed(in.seed, kSaltInit));
    } catch (const std::exception& e) {
      init_error = e.what();
    }
    for (const SolverSpec& solver : s.solvers) {
      if (!u0) {
        out.results.push_back(failed_row(r_prime, solver, init_error));
        continue;
      }
      try {
        RunOptions opts;
        if (trace) opts.truth = &*truth;  // per-iteration metrics are only needed for traces
        const RunResult run = solver.algorithm == Algorithm::kSubgd
                                  ? subgd(*ens, y, *u0, solver.policy, s.T, opts)
                                  : gd_l2(*ens, y, *u0, solver.policy, s.T, opts);
        Row row = base_cells(r_prime, solver);
        const double final_err = error_frobenius(run.u, *truth);
        const Vector r = residual(y, *ens, run.u);
        double signal = std::numeric_limits<double>::quiet_NaN();
        double error = std::numeric_limits<double>::quiet_NaN();
        if (s.r_star == 1) {
          const Decomposition dec = decompose(run.u, *truth);
          signal = dec.signal.norm();
          error = spectral_norm(dec.error);
        }
        row.insert(row.end(),
                   {str(run.iterations), str(final_err), str(loss_l1_from_residual(r)),
                    str(loss_l2_from_residual(r)), str(signal), str(error),
                    final_err < kSuccessThreshold ? "1" : "0", str(to_string(run.status)), ""});
        out.results.push_back(std::move(row));
        if (trace) {
          const Row key{s.name,
                        nonempty(s.variant),
                        str(in.trial),
                        str(in.seed),
                        str(in.d),
                        str(in.m),
                        str(r_prime),
                        str(in.p),
                        str(to_string(in.dist)),
                        str(noise_scale),
                        str(to_string(solver.algorithm)),
                        str(to_string(solver.policy.kind)),
                        str(solver.policy.eta0),
                        str(solver.policy.rho)};
          for (const IterationRow& it : run.record.rows) {
            Row tr = key;
            const Row cells = iteration_cells(it);
            tr.insert(tr.end(), cells.begin(), cells.end());
            out.traces.push_back(std::move(tr));
          }
        }
      } catch (const std::exception& e) {
        out.results.push_back(failed_row(r_prime, solver, e.what()));
      }
    }
  }
  return out;
}

inline InstanceRows run_rip(const Instance& in) {
  const Scenario& s = *in.scenario;
  InstanceRows out;
  const NoiseSpec noise_spec =
      make_noise(s, in.p, in.dist, in.level, derive_seed(in.seed, kSaltNoise));
  auto base_cells = [&](RipKind kind, int r) {
    return Row{s.name,         nonempty(s.variant), str(in.trial),        str(in.seed),
               str(to_string(kind)), str(r),        str(in.m),            str(in.d),
               str(in.p),      str(noise_spec.scale), str(s.n_samples)};
  };
  std::optional<MeasurementEnsemble> ens;
  NoiseVector noise;
  std::string setup_error;
  try {
    ens.emplace(in.d, in.m, derive_seed(in.seed, kSaltEnsemble), s.ensemble);
    noise = gen_noise(in.m, noise_spec);
  } catch (const std::exception& e) {
    setup_error = e.what();
  }
  ScalingFunction sf = ScalingFunction::from_noise(noise_spec);
  sf.mc_seed = derive_seed(in.seed, kSaltPhi);
  const std::uint64_t probe_seed = derive_seed(in.seed, kSaltProbe);
  for (int r : s.rank) {
    for (RipKind kind : s.certifiers) {
      Row row = base_cells(kind, r);
      try {
        if (!ens) throw Error(setup_error);
        RipEstimate est;
        double phi = std::numeric_limits<double>::quiet_NaN();
        switch (kind) {
          case RipKind::kL2:
            est = estimate_l2_rip(*ens, r, s.n_samples, probe_seed);
            break;
          case RipKind::kL1L2:
            est = estimate_l1l2_rip(*ens, r, s.n_samples, probe_seed);
            break;
          case RipKind::kSign:
            est = estimate_sign_rip(*ens, noise, sf, r, s.n_samples, probe_seed);
            phi = est.phi_at_witness;
            break;
        }
        row.insert(row.end(),
                   {str(est.delta_hat), str(phi), str(to_string(in.dist)), "ok", ""});
      } catch (const std::exception& e) {
        row.insert(row.end(), {"nan", "nan", str(to_string(in.dist)), "failed", csv_cell(e.what())});
      }
      out.results.push_back(std::move(row));
    }
  }
  return out;
}

inline InstanceRows run_deviation(const Instance& in) {
  const Scenario& s = *in.scenario;
  InstanceRows out;
  const NoiseSpec noise_spec =
      make_noise(s, in.p, in.dist, in.level, derive_seed(in.seed, kSaltNoise));
  Row row{s.name, nonempty(s.variant), str(in.trial),  str(in.seed),
          str(in.d), str(in.m),        str(in.p),      str(to_string(in.dist)),
          str(noise_spec.scale), str(s.n_samples)};
  try {
    const MeasurementEnsemble ens(in.d, in.m, derive_seed(in.seed, kSaltEnsemble), s.ensemble);
    const NoiseVector noise = gen_noise(in.m, noise_spec);
    const std::uint64_t probe_seed = derive_seed(in.seed, kSaltProbe);
    const L2Deviation dev = q_deviation_l2(ens, noise, s.n_samples, probe_seed);
    const RipEstimate l2 = estimate_l2_rip(ens, s.rank.front(), s.n_samples, probe_seed);
    row.insert(row.end(),
               {str(dev.deviation), str(dev.noise_term), str(l2.delta_hat), "ok", ""});
  } catch (const std::exception& e) {
    row.insert(row.end(), {"nan", "nan", "nan", "failed", csv_cell(e.what())});
  }
  out.results.push_back(std::move(row));
  return out;
}

inline std::vector<Instance> enumerate(const Scenario& root, std::uint64_t base_seed) {
  std::vector<Instance> out;
  std::vector<const Scenario*> parts;
  if (root.variants.empty())
    parts.push_back(&root);
  else
    for (const Scenario& v : root.variants) parts.push_back(&v);
  for (const Scenario* sp : parts) {
    const Scenario& s = *sp;
    for (int d : s.d)
      for (int m : s.m)
        for (double p : s.p)
          for (NoiseDist dist : s.dist)
            for (double level : s.noise_scale)
              for (int trial = 0; trial < s.trials; ++trial) {
                Instance in;
                in.ordinal = out.size();
                in.scenario = &s;
                in.d = d;
                in.m = m;
                in.p = p;
                in.dist = dist;
                in.level = level;
                in.trial = trial;
                in.seed = instance_seed(base_seed, trial);
                out.push_back(in);
              }
  }
  return out;
}

// Serialized sink. Every finished instance is appended to the partial file
// as whole lines in a single write, each prefixed by its ordinal.
class Sink {
 public:
  Sink(std::size_t n, std::filesystem::path partial) : slots_(n), partial_(std::move(partial)) {
    if (!partial_.empty()) file_.open(partial_, std::ios::binary | std::ios::trunc);
  }

  void put(std::size_t ordinal, InstanceRows rows) {
    std::string block;
    for (const Row& r : rows.results) block += std::to_string(ordinal) + ',' + join_row(r) + '\n';
    std::lock_guard lock(mu_);
    if (file_.is_open()) {
      file_.write(block.data(), static_cast<std::streamsize>(block.size()));
      file_.flush();
    }
    slots_[ordinal] = std::move(rows);
    ++done_;
  }

  std::size_t done() const {
    std::lock_guard lock(mu_);
    return done_;
  }

  std::vector<InstanceRows>& slots() { return slots_; }

  void finish() {
    if (file_.is_open()) file_.close();
    if (!partial_.empty()) std::filesystem::remove(partial_);
  }

 private:
  mutable std::mutex mu_;
  std::vector<InstanceRows> slots_;
  std::filesystem::path partial_;
  std::ofstream file_;
  std::size_t done_ = 0;
};

inline std::vector<std::string> summary_keys(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kRecovery:
      return {"scenario", "variant",     "d",              "m",         "r_star", "r_prime",
              "p",        "dist",        "noise_scale",    "noise_variance", "algorithm",
              "policy",   "eta0",        "rho",            "init",      "alpha",  "T"};
    case ScenarioKind::kRip:
      return {"scenario", "variant", "kind", "r", "m", "d", "p", "sigma", "dist", "n_samples"};
    case ScenarioKind::kDeviation:
      return {"scenario", "variant", "d", "m", "p", "dist", "sigma", "n_samples"};
  }
  return {};
}

inline std::vector<std::string> summary_metrics(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kRecovery:
      return {"final_err", "final_loss_l1", "success"};
    case ScenarioKind::kRip:
      return {"delta_hat"};
    case ScenarioKind::kDeviation:
      return {"deviation", "noise_term", "l2_delta_hat"};
  }
  return {};
}

}  // namespace detail

inline std::filesystem::path default_output_dir() {
  if (const char* env = std::getenv("RSENSE_OUTPUT_DIR"); env != nullptr && *env != '\0')
    return env;
  return "rsense-out";
}

// Runs every instance of `s` (all variants share one result table; all
// variants must have the same kind).
inline ScenarioOutput run_scenario(const Scenario& s, const RunConfig& cfg = {}) {
  s.validate();
  const auto parts = s.expand();
  for (const Scenario& v : parts)
    if (v.kind != s.kind) throw ValidationError("variants", "all variants must share one kind");
  const bool trace = cfg.trace.value_or(s.trace);
  const std::uint64_t base_seed = cfg.seed.value_or(s.base_seed);

  ScenarioOutput out;
  switch (s.kind) {
    case ScenarioKind::kRecovery:
      out.results.columns = detail::recovery_columns();
      break;
    case ScenarioKind::kRip:
      out.results.columns = detail::rip_columns();
      break;
    case ScenarioKind::kDeviation:
      out.results.columns = detail::deviation_columns();
      break;
  }
  if (trace && s.kind == ScenarioKind::kRecovery) out.traces.columns = detail::trace_columns();

  if (!cfg.out_dir.empty()) {
    out.dir = cfg.out_dir / s.name;
    std::filesystem::create_directories(out.dir);
  }

  const std::vector<detail::Instance> instances = detail::enumerate(s, base_seed);
  detail::Sink sink(instances.size(),
                    out.dir.empty() ? std::filesystem::path{} : out.dir / "results.partial.csv");
  std::atomic<std::size_t> next{0};
  std::mutex log_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= instances.size()) return;
      const detail::Instance& in = instances[i];
      detail::InstanceRows rows;
      switch (in.scenario->kind) {
        case ScenarioKind::kRecovery:
          rows = detail::run_recovery(in, trace);
          break;
        case ScenarioKind::kRip:
          rows = detail::run_rip(in);
          break;
        case ScenarioKind::kDeviation:
          rows = detail::run_deviation(in);
          break;
      }
      sink.put(in.ordinal, std::move(rows));
      if (cfg.log != nullptr) {
        std::lock_guard lock(log_mu);
        *cfg.log << "[" << sink.done() << "/" << instances.size() << "] " << s.name
                 << (in.scenario->variant.empty() ? "" : "/" + in.scenario->variant)
                 << " d=" << in.d << " m=" << in.m << " p=" << in.p
                 << " dist=" << to_string(in.dist) << " level=" << in.level
                 << " trial=" << in.trial << "\n";
      }
    }
  };
  const int width = std::max(1, std::min<int>(cfg.threads, static_cast<int>(instances.size())));
  {
    std::vector<std::jthread> pool;
    for (int k = 1; k < width; ++k) pool.emplace_back(worker);
    worker();
  }

  for (detail::InstanceRows& r : sink.slots()) {
    for (Row& row : r.results) out.results.rows.push_back(std::move(row));
    for (Row& row : r.traces) out.traces.rows.push_back(std::move(row));
  }
  out.summary = summarize(out.results, detail::summary_keys(s.kind), detail::summary_metrics(s.kind));

  if (!out.dir.empty()) {
    out.results.write_csv(out.dir / "results.csv");
    out.summary.write_csv(out.dir / "summary.csv");
    if (!out.traces.columns.empty()) out.traces.write_csv(out.dir / "traces.csv");
    sink.finish();
    for (std::size_t i = 0; i < s.plots.size(); ++i) {
      const PlotSpec& spec = s.plots[i];
      if (spec.source == "trace" && out.traces.columns.empty()) {
        if (cfg.log != nullptr) *cfg.log << "warning: plot " << i << " needs traces; skipped\n";
        continue;
      }
      const ResultTable& src = spec.source == "trace" ? out.traces : out.results;
      const auto stem = out.dir / "plots" / (s.name + "-" + std::to_string(i + 1) + "-" + spec.kind);
      const auto files = emit_plots(src, spec, stem, cfg.log);
      out.plots.insert(out.plots.end(), files.begin(), files.end());
    }
  }
  return out;
}

}  // namespace rsense::experiments
