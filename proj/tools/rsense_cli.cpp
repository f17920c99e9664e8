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

// Command-line front end.
//
//   rsense run <scenario.yaml> [--override k=v ...]
//   rsense canned <name> [--override k=v ...]
//   rsense plot <results.csv> --kind line|heatmap --x COL [--y COL] --value COL
//   rsense rip --d 10 --m 5000 --r 1 --p 0 --kind sign
//
// Exit codes: 0 success, 1 validation error, 2 runtime failure.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rsense/rsense.hpp"

namespace {

namespace ex = rsense::experiments;

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct Common {
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string out;
  bool trace = false;
  bool quiet = false;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Override base_seed");
  cmd->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out, "Output directory (default: $RSENSE_OUTPUT_DIR or rsense-out)");
  cmd->add_flag("--trace", c.trace, "Record per-iteration traces");
  cmd->add_flag("-q,--quiet", c.quiet, "No progress output");
  cmd->add_option("--override", c.overrides, "Scenario override key=value (repeatable)");
}

std::filesystem::path output_dir(const Common& c, const ex::Scenario& s) {
  if (!c.out.empty()) return c.out;
  if (!s.output_dir.empty()) return s.output_dir;
  return ex::default_output_dir();
}

int run(const ex::Scenario& s, const Common& c) {
  ex::RunConfig cfg;
  cfg.out_dir = output_dir(c, s);
  cfg.threads = c.threads;
  cfg.seed = c.seed;
  if (c.trace) cfg.trace = true;
  cfg.log = c.quiet ? nullptr : &std::cerr;
  const ex::ScenarioOutput out = ex::run_scenario(s, cfg);
  std::size_t failed = 0;
  const int status = out.results.index("status");
  for (const auto& row : out.results.rows)
    if (row[static_cast<std::size_t>(status)] == "failed") ++failed;
  std::cout << "wrote " << out.results.rows.size() << " rows to " << (out.dir / "results.csv").string()
            << "\n";
  for (const auto& p : out.plots) std::cout << "wrote " << p.string() << "\n";
  if (failed > 0) std::cout << failed << " cells failed; see the status column\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust low-rank matrix sensing experiments"};
  app.require_subcommand(1);

  Common run_opts;
  std::string scenario_file;
  CLI::App* run_cmd = app.add_subcommand("run", "Run a scenario file");
  run_cmd->add_option("scenario", scenario_file, "Scenario YAML file")->required();
  add_common(run_cmd, run_opts);

  Common canned_opts;
  std::string preset;
  bool list_presets = false;
  CLI::App* canned_cmd = app.add_subcommand("canned", "Run a preset scenario");
  canned_cmd->add_option("name", preset, "Preset name");
  canned_cmd->add_flag("--list", list_presets, "List presets");
  add_common(canned_cmd, canned_opts);

  std::string csv_file, plot_out;
  ex::PlotSpec plot_spec;
  CLI::App* plot_cmd = app.add_subcommand("plot", "Plot a results CSV");
  plot_cmd->add_option("csv", csv_file, "CSV file")->required()->check(CLI::ExistingFile);
  plot_cmd->add_option("--kind", plot_spec.kind, "line or heatmap")
      ->check(CLI::IsMember({"line", "heatmap"}))
      ->required();
  plot_cmd->add_option("--x", plot_spec.x, "x column")->required();
  plot_cmd->add_option("--y", plot_spec.y, "y column (heatmap)");
  plot_cmd->add_option("--value", plot_spec.value, "value column")->required();
  plot_cmd->add_option("--series", plot_spec.series, "series columns (line)");
  plot_cmd->add_option("--facet", plot_spec.facet, "one figure per value of this column");
  plot_cmd->add_option("--aggregate", plot_spec.aggregate, "median or success")
      ->check(CLI::IsMember({"median", "success"}));
  plot_cmd->add_option("--threshold", plot_spec.threshold, "success threshold");
  plot_cmd->add_option("--title", plot_spec.title, "figure title");
  plot_cmd->add_option("--out", plot_out, "output stem (default: next to the CSV)");

  int rip_d = 10, rip_m = 5000, rip_r = 1, rip_n = 200;
  double rip_p = 0.0, rip_sigma = 1.0;
  std::string rip_dist = "gaussian";
  std::vector<std::string> rip_kinds{"l2", "l1l2", "sign"};
  std::uint64_t rip_seed = 0;
  CLI::App* rip_cmd = app.add_subcommand("rip", "Estimate RIP deficiencies for one instance");
  rip_cmd->add_option("--d", rip_d, "dimension")->check(CLI::PositiveNumber);
  rip_cmd->add_option("--m", rip_m, "measurements")->check(CLI::PositiveNumber);
  rip_cmd->add_option("--r", rip_r, "probe rank")->check(CLI::PositiveNumber);
  rip_cmd->add_option("--p", rip_p, "corruption probability")->check(CLI::Range(0.0, 1.0));
  rip_cmd->add_option("--dist", rip_dist, "noise distribution");
  rip_cmd->add_option("--sigma", rip_sigma, "noise scale")->check(CLI::NonNegativeNumber);
  rip_cmd->add_option("--n-samples", rip_n, "random probes")->check(CLI::PositiveNumber);
  rip_cmd->add_option("--kind", rip_kinds, "certifiers: l2, l1l2, sign");
  rip_cmd->add_option("--seed", rip_seed, "seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*run_cmd) return run(ex::load_scenario(scenario_file, run_opts.overrides), run_opts);
    if (*canned_cmd) {
      if (list_presets || preset.empty()) {
        for (auto name : ex::kPresetNames) std::cout << name << "\n";
        return preset.empty() && !list_presets ? kExitValidation : 0;
      }
      return run(ex::canned(preset, canned_opts.overrides), canned_opts);
    }
    if (*plot_cmd) {
      const ex::ResultTable table = ex::read_csv(csv_file);
      std::filesystem::path stem = plot_out;
      if (stem.empty()) {
        stem = std::filesystem::path(csv_file);
        stem.replace_extension();
        stem += "-" + plot_spec.kind;
      }
      for (const auto& p : ex::emit_plots(table, plot_spec, stem)) std::cout << "wrote " << p.string() << "\n";
      return 0;
    }
    if (*rip_cmd) {
      const auto dist = rsense::parse_noise_dist(rip_dist);
      rsense::require(rip_r <= rip_d, "--r must not exceed --d");
      const rsense::MeasurementEnsemble ens(rip_d, rip_m, rsense::derive_seed(rip_seed, ex::kSaltEnsemble));
      const rsense::NoiseSpec spec{rip_p, dist, rip_sigma, rsense::derive_seed(rip_seed, ex::kSaltNoise)};
      spec.validate();
      const rsense::NoiseVector noise = rsense::gen_noise(rip_m, spec);
      rsense::ScalingFunction sf = rsense::ScalingFunction::from_noise(spec);
      sf.mc_seed = rsense::derive_seed(rip_seed, ex::kSaltPhi);
      const std::uint64_t probe_seed = rsense::derive_seed(rip_seed, ex::kSaltProbe);
      std::cout << rsense::RipEstimate::kCsvHeader << "\n";
      for (const auto& k : rip_kinds) {
        rsense::RipEstimate est;
        switch (rsense::parse_rip_kind(k)) {
          case rsense::RipKind::kL2:
            est = rsense::estimate_l2_rip(ens, rip_r, rip_n, probe_seed);
            break;
          case rsense::RipKind::kL1L2:
            est = rsense::estimate_l1l2_rip(ens, rip_r, rip_n, probe_seed);
            break;
          case rsense::RipKind::kSign:
            est = rsense::estimate_sign_rip(ens, noise, sf, rip_r, rip_n, probe_seed);
            break;
        }
        std::cout << est.csv_row(rip_m, rip_d, rip_p, rip_sigma) << "\n";
      }
      return 0;
    }
  } catch (const rsense::ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
