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

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lineage {

inline constexpr int kMinRiskScore = 1;
inline constexpr int kMaxRiskScore = 5;  // "No clear vulnerability"

/// One structured detector verdict.
struct DetectionRun {
  std::string model_id;
  int risk_score = kMaxRiskScore;
  std::vector<std::string> vuln_types;
  std::vector<std::string> reasoning_chain;
  std::string raw_text;
  std::vector<int> finding_lines;
  // Round conditions, logged so repeated analyses can be told apart.
  int round_index = 0;
  double temperature = 0.0;
  bool paraphrased = false;

  bool operator==(const DetectionRun&) const = default;
};

/// Case-folds and trims a vulnerability type. Returns "" for "N/A" and blank
/// values so callers can drop them.
std::string normalize_vuln_type(std::string_view raw);

/// Validates the score range and normalizes vuln_types in place. A score of
/// 5 clears the type list. Throws ValidationError on an out-of-range score.
void normalize_run(DetectionRun& run);

struct ComponentScores {
  double s_eva = 0.0;
  double s_hal = 0.0;
  double s_con = 0.0;
  double s_tr = 0.0;

  double sum() const { return s_eva + s_hal + s_con + s_tr; }
  bool operator==(const ComponentScores&) const = default;
};

/// Aggregate evading potential. phi is the mean over models of the four
/// component sums and so lies in [0, 4].
struct PotentialScore {
  double s_eva = 0.0;
  double s_hal = 0.0;
  double s_con = 0.0;
  double s_tr = 0.0;
  double phi = 0.0;
  std::map<std::string, ComponentScores> per_model;

  bool operator==(const PotentialScore&) const = default;
};

/// (mean risk score - 1) / 4.
double evasion_score(std::span<const DetectionRun> runs);

struct Consistency {
  double sc = 1.0;     // stability, 1 - min(sigma / 2, 1)
  double s_con = 0.0;  // instability contributed to phi, 1 - sc
};

/// Population standard deviation of risk scores, normalized by 2 (the
/// largest possible deviation on [1, 5]).
Consistency self_consistency(std::span<const DetectionRun> runs);

/// Normalized Shannon entropy of the pooled vulnerability types. Zero when
/// at most one distinct type is present.
double hallucination_score(std::span<const DetectionRun> runs);

/// Fraction of models on which the candidate evaded detection.
double transferability_score(const std::map<std::string, bool>& per_model_pass);

/// Full potential. Keys of both maps must match.
PotentialScore potential(const std::map<std::string, std::vector<DetectionRun>>& per_model_runs,
                         const std::map<std::string, bool>& per_model_pass);

/// Same aggregation with an externally computed transferability, used when
/// transfer is judged over a subset of the models (the verifier's ensemble).
PotentialScore potential_with_transfer(
    const std::map<std::string, std::vector<DetectionRun>>& per_model_runs, double s_tr);

/// True iff a strict majority of runs report score 5. Even-count ties fail.
bool pass_verdict(std::span<const DetectionRun> runs);

/// Lower median of the risk scores. Equals 5 exactly when pass_verdict holds.
int majority_score(std::span<const DetectionRun> runs);

}  // namespace lineage
