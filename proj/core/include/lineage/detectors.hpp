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

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lineage/scoring.hpp"
#include "lineage/strategy_tree.hpp"
#include "lineage/transport.hpp"

namespace lineage {

struct DetectionRule {
  std::string pattern;
  int score = 1;  // 1..4
  std::string vuln_type;

  bool operator==(const DetectionRule&) const = default;
};

/// Knobs of the simulated detector's systematic weaknesses.
struct BlindSpotConfig {
  std::vector<DetectionRule> base_rules;
  int indirection_blindness_depth = 1;
  double type_confusion_prob = 0.0;
  double score_jitter_prob = 0.0;
  std::uint64_t seed = 0;

  /// Throws ValidationError naming the offending field.
  void validate() const;
  bool operator==(const BlindSpotConfig&) const = default;
};

enum class DetectorKind { kSimulated, kRemote };

std::string_view to_string(DetectorKind k);

struct DetectorSpec {
  std::string detector_id;
  DetectorKind kind = DetectorKind::kSimulated;
  std::optional<std::string> endpoint;
  std::optional<std::string> model_name;
  double temperature = 0.0;
  int max_rounds = 1;
  std::chrono::milliseconds timeout{30000};
  int max_retries = 2;
  std::string api_key_env;
  std::optional<BlindSpotConfig> blind_spots;

  void validate() const;
  bool operator==(const DetectorSpec&) const = default;
};

/// Per-call conditions. Simulated detectors derive their randomness from
/// (seed, candidate_id, round_index) only.
struct DetectionContext {
  CandidateId candidate_id = 0;
  int round_index = 0;
  int indirection_depth = 0;
  double temperature = 0.0;
  bool paraphrase = false;
};

class Detector {
 public:
  explicit Detector(std::string id) : id_(std::move(id)) {}
  virtual ~Detector() = default;

  const std::string& id() const { return id_; }
  /// Thread-safe.
  DetectionRun detect(std::string_view code, const DetectionContext& ctx);
  std::uint64_t calls() const { return calls_.load(); }

 protected:
  virtual DetectionRun run(std::string_view code, const DetectionContext& ctx) = 0;

 private:
  std::string id_;
  std::atomic<std::uint64_t> calls_{0};
};

/// Rule-table detector with configurable blind spots.
///
/// A rule fires when its pattern occurs verbatim in the code, or occurs in
/// the deobfuscated code while the candidate's indirection depth is below
/// the blindness depth. The verdict is the lowest score among fired rules,
/// or 5 when none fires.
class SimulatedDetector : public Detector {
 public:
  SimulatedDetector(std::string id, BlindSpotConfig config);
  const BlindSpotConfig& config() const { return config_; }

  /// Rules that fire for this code at this depth, before any noise.
  std::vector<DetectionRule> fired_rules(std::string_view code, int indirection_depth) const;

 protected:
  DetectionRun run(std::string_view code, const DetectionContext& ctx) override;

 private:
  BlindSpotConfig config_;
};

class RemoteDetector : public Detector {
 public:
  RemoteDetector(DetectorSpec spec, std::shared_ptr<ChatTransport> transport);

 protected:
  DetectionRun run(std::string_view code, const DetectionContext& ctx) override;

 private:
  DetectorSpec spec_;
  std::shared_ptr<ChatTransport> transport_;
};

/// Builds a detector from its spec. Remote detectors use `transport` when
/// given, otherwise an HTTP transport built from the spec.
std::unique_ptr<Detector> make_detector(const DetectorSpec& spec,
                                        std::shared_ptr<ChatTransport> transport = nullptr);

/// Parses a detector reply. Total: returns a normalized run or throws
/// FormatError.
DetectionRun parse_report(std::string_view raw);

/// Vulnerability types a confused detector may report instead of the real one.
const std::vector<std::string>& confusion_pool();

}  // namespace lineage
