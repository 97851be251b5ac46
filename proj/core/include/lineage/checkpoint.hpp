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

// On-disk campaign state. Every file carries the campaign id; every write
// goes to a temporary file that is then renamed over the target.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lineage/candidate.hpp"
#include "lineage/config.hpp"
#include "lineage/generator.hpp"
#include "lineage/strategy_tree.hpp"
#include "lineage/verifier.hpp"

namespace lineage {

inline constexpr const char* kTreeFile = "tree.jsonl";
inline constexpr const char* kLibraryFile = "library.json";
inline constexpr const char* kMetaFile = "campaign.meta";
inline constexpr const char* kCandidatesFile = "candidates.jsonl";
inline constexpr const char* kTranscriptFile = "transcript.log";
inline constexpr const char* kReportFile = "report.json";
inline constexpr const char* kLockFile = ".lock";

struct CampaignReport {
  std::string campaign_id;
  std::string vuln_label;
  int cycles_used = 0;
  std::vector<std::pair<int, int>> score_trajectory;  // (cycle, best risk score so far)
  int initial_score = 0;
  int final_score = 0;
  bool pass = false;
  std::optional<CandidateId> passing_candidate;
  CandidateId best_candidate = 0;
  bool static_pass = false;
  bool completed = false;  // false while cycles remain and the run was interrupted
  std::string annotation;

  bool operator==(const CampaignReport&) const = default;
};

nlohmann::json report_to_json(const CampaignReport& r);
CampaignReport report_from_json(const nlohmann::json& j);

nlohmann::json run_to_json(const DetectionRun& r);
DetectionRun run_from_json(const nlohmann::json& j);
nlohmann::json candidate_to_json(const Candidate& c);
Candidate candidate_from_json(const nlohmann::json& j);
nlohmann::json outcome_to_json(const VerifierOutcome& o);
VerifierOutcome outcome_from_json(const nlohmann::json& j);

/// Everything needed to continue a campaign.
struct CampaignState {
  std::string campaign_id;
  CampaignConfig config;
  StrategyTree tree;
  StrategyLibrary library;
  std::map<CandidateId, Candidate> candidates;
  std::map<CandidateId, VerifierOutcome> outcomes;
  std::vector<std::vector<std::string>> failed_lineages;
  bool baseline_done = false;
  int cycles_completed = 0;
  CandidateId next_candidate_id = 1;
  int initial_score = 0;
  std::vector<std::pair<int, int>> trajectory;
  bool finished = false;
  std::string annotation;
  std::vector<std::string> transcript;

  bool operator==(const CampaignState&) const = default;
};

/// Hex digest of the resolved config.
std::string campaign_id_for(const CampaignConfig& config);

void write_atomic(const std::filesystem::path& path, const std::string& contents);

/// Writes every state file plus the report.
void save_checkpoint(const std::filesystem::path& dir, const CampaignState& state,
                     const CampaignReport& report);

/// Throws CheckpointError when a file is missing or malformed, or when the
/// files disagree about the campaign id (the message lists each mismatch).
CampaignState load_checkpoint(const std::filesystem::path& dir);

/// Reads only report.json, checking its campaign id against campaign.meta.
CampaignReport load_report(const std::filesystem::path& dir);

/// Exclusive advisory lock on <dir>/.lock, held for the object's lifetime.
/// Throws CheckpointError when another process holds it.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  int fd_ = -1;
};

}  // namespace lineage
