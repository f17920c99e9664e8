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

// Preset scenarios. Each preset is a file <name>.yaml in the preset
// directory: $RSENSE_PRESET_DIR if set, otherwise the directory compiled in
// as RSENSE_DEFAULT_PRESET_DIR.

#pragma once

#include <algorithm>
#include <array>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rsense/experiments/scenario.hpp"

#ifndef RSENSE_DEFAULT_PRESET_DIR
#define RSENSE_DEFAULT_PRESET_DIR "scenarios"
#endif

namespace rsense::experiments {

inline constexpr std::array<std::string_view, 8> kPresetNames{
    "recovery-curves", "heatmap-mp",     "dim-vs-m",       "noise-magnitude",
    "noise-types",     "stepsize-compare", "rip-estimation", "deviation-demo"};

inline std::filesystem::path preset_dir() {
  if (const char* env = std::getenv("RSENSE_PRESET_DIR"); env != nullptr && *env != '\0')
    return env;
  return RSENSE_DEFAULT_PRESET_DIR;
}

inline std::string preset_list() {
  std::string out;
  for (std::size_t i = 0; i < kPresetNames.size(); ++i) {
    if (i) out += ", ";
    out += kPresetNames[i];
  }
  return out;
}

inline std::filesystem::path preset_path(const std::string& name) {
  if (std::find(kPresetNames.begin(), kPresetNames.end(), name) == kPresetNames.end())
    throw ValidationError("name", "unknown preset '" + name + "'; valid presets: " + preset_list());
  return preset_dir() / (name + ".yaml");
}

inline Scenario canned(const std::string& name, const std::vector<std::string>& overrides = {}) {
  return load_scenario(preset_path(name), overrides);
}

}  // namespace rsense::experiments
