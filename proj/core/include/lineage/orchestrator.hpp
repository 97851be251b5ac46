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

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lineage/checkpoint.hpp"
#include "lineage/config.hpp"
#include "lineage/detectors.hpp"
#include "lineage/generator.hpp"
#include "lineage/reflection.hpp"
#include "lineage/semantic.hpp"
#include "lineage/static_analysis.hpp"
#include "lineage/transport.hpp"
#include "lineage/verifier.hpp"

namespace lineage {

struct RunOptions {
  /// Where state is saved after the baseline and after every cycle. When
  /// empty nothing is written.
  std::optional<std::filesystem::path> checkpoint_dir;
  /// Return after this many cycles in this invocation, leaving the campaign
  /// resumable.
  std::optional<int> stop_after_cycles;
  /// Used by every remote component instead of HTTP transports built from
  /// the config.
  std::shared_ptr<ChatTransport> transport;
  /// Receives transcript lines as they are produced.
  std::function<void(const std::string&)> on_log;
};

/// One campaign: the original program, the strategy tree grown from it, the
/// strategy library and every evaluated candidate.
class Campaign {
 public:
  /// Fresh campaign. Throws ConfigError when the original does not parse.
  Campaign(CampaignConfig config, RunOptions options = {});
  /// Continues from saved state.
  Campaign(CampaignState state, RunOptions options);
  ~Campaign();

  /// Baseline verification of the original program. Idempotent.
  void baseline();
  /// One sample, plan, synthesize, check, verify, reflect iteration. Returns
  /// false when the campaign had already finished and nothing ran.
  bool step();
  /// Runs baseline and cycles until pass, exhaustion, budget or the stop
  /// option.
  CampaignReport run();

  CampaignReport report() const;
  const CampaignState& state() const { return state_; }
  /// Detector calls made through this object, across all detectors.
  std::uint64_t detector_calls() const;
  /// Detector calls made for one candidate.
  std::uint64_t detector_calls_for(CandidateId id) const;

 private:
  void build_components();
  void log(std::string line);
  void checkpoint();
  bool expandable() const;
  VerifierOutcome evaluate(const Candidate& candidate);
  void enforce_width_cap();

  CampaignState state_;
  RunOptions options_;
  std::unique_ptr<Detector> primary_;
  std::vector<std::unique_ptr<Detector>> ensemble_;
  AdapterRegistry adapters_;
  std::unique_ptr<Verifier> verifier_;
  std::unique_ptr<GeneratorBackend> generator_;
  std::unique_ptr<ReflectionBackend> reflector_;
  std::unique_ptr<SemanticChecker> checker_;
  std::map<CandidateId, std::uint64_t> calls_by_candidate_;
  int cycles_this_run_ = 0;
};

CampaignReport run_campaign(const CampaignConfig& config, const RunOptions& options = {});

/// Loads the checkpoint in `dir` and continues the campaign, saving back into
/// `dir`. A finished campaign only re-emits its report.
CampaignReport resume(const std::filesystem::path& dir, RunOptions options = {});

/// Writes one JSON line per admitted non-original candidate of every
/// campaign and returns the record count. Record ids are
/// "<campaign id>-<candidate id>"; a campaign listed twice contributes once.
std::size_t export_dataset(const std::vector<std::filesystem::path>& campaign_dirs,
                           const std::filesystem::path& out_path);

}  // namespace lineage
