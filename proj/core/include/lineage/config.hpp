// Copyright 2026 The Lineage Authors.
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lineage/detectors.hpp"
#include "lineage/semantic.hpp"
#include "lineage/static_analysis.hpp"

namespace lineage {

enum class CampaignMode { kSimulated, kRemote, kMixed };

std::string_view to_string(CampaignMode m);

struct GeneratorSpec {
  bool remote = false;
  std::string endpoint;
  std::string model_name;
  std::string api_key_env;
  double temperature = 0.7;
  std::chrono::milliseconds timeout{120000};
  int max_retries = 2;

  bool operator==(const GeneratorSpec&) const = default;
};

struct AdapterSpec {
  bool builtin = true;
  ExternalAdapterSpec external;  // used when builtin is false

  bool operator==(const AdapterSpec&) const = default;
};

struct CampaignConfig {
  std::string vuln_label;
  std::string original_code;
  std::string language_tag = "python-subset";
  CampaignMode mode = CampaignMode::kSimulated;
  int budget_cycles = 12;
  int width_k = 3;
  int k_rounds = 3;
  std::uint32_t threshold_n = 3;
  std::uint64_t rng_seed = 0;
  int max_depth = 8;
  int max_active = 64;
  DetectorSpec primary;
  std::vector<DetectorSpec> ensemble;
  std::vector<AdapterSpec> adapters;
  GeneratorSpec generator;
  SemanticHookSpec semantic_hook;
  std::string library_path;  // empty: start from the seed library
  bool parallel = true;

  bool operator==(const CampaignConfig&) const = default;
};

struct ConfigViolation {
  std::string path;  // dotted field path, e.g. "detectors.ensemble[1].endpoint"
  std::string message;

  std::string str() const { return path + ": " + message; }
};

struct ConfigParseResult {
  std::optional<CampaignConfig> config;
  std::vector<ConfigViolation> violations;
};

/// Reads and cross-checks a config document. Code and test paths are opened
/// relative to the working directory. A seed override replaces rng_seed
/// before per-detector seeds are derived.
ConfigParseResult parse_config(const nlohmann::json& doc,
                               std::optional<std::uint64_t> seed_override = std::nullopt);

/// Parses the file and throws ConfigError listing every violation.
CampaignConfig load_config(const std::filesystem::path& path,
                           std::optional<std::uint64_t> seed_override = std::nullopt);

/// Self-contained form: code and tests inline, every default explicit.
/// parse_config(config_to_json(c)) reproduces c.
nlohmann::json config_to_json(const CampaignConfig& config);

}  // namespace lineage
