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
#include <optional>
#include <string>
#include <vector>

#include "lineage/candidate.hpp"
#include "lineage/detectors.hpp"
#include "lineage/scoring.hpp"
#include "lineage/static_analysis.hpp"

namespace lineage {

struct Phase1Record {
  bool parse_ok = false;
  std::map<std::string, std::vector<StaticFinding>> analyzer_findings;
  std::map<std::string, std::string> adapter_errors;  // adapter id -> message

  bool operator==(const Phase1Record&) const = default;
};

struct Phase3Vote {
  bool pass = false;
  std::optional<DetectionRun> run;  // absent when the model abstained
  std::string error;

  bool operator==(const Phase3Vote&) const = default;
};

struct VerifierOutcome {
  CandidateId candidate_id = 0;
  bool admitted = false;
  bool semantic_ok = true;  // false when the semantic hook rejected the candidate
  Phase1Record phase1;
  std::vector<DetectionRun> phase2_runs;
  std::map<std::string, Phase3Vote> phase3_votes;
  bool pass = false;
  std::optional<PotentialScore> potential;
  ReflectionDigest feedback_digest;
  std::string error;  // set when a phase could not complete

  bool operator==(const VerifierOutcome&) const = default;
};

struct VerifierConfig {
  int k_rounds = 3;               // odd, >= 3
  double base_temperature = 0.0;  // round r runs at base + r * step
  double temperature_step = 0.3;
  bool parallel = true;
};

/// Three-phase admission and evaluation: static checks, repeated analysis by
/// the primary detector, and one vote per ensemble model.
class Verifier {
 public:
  Verifier(Detector& primary, std::vector<Detector*> ensemble, AdapterRegistry& adapters,
           VerifierConfig config);

  /// Admitted iff the code parses and every adapter reports no findings.
  /// An adapter that fails to run blocks admission.
  Phase1Record phase1_static(const Candidate& candidate, bool& admitted);
  /// k_rounds runs with varied temperature and an alternating paraphrase
  /// preamble. Throws PhaseError when more than half of the rounds fail.
  std::vector<DetectionRun> phase2_multiround(const Candidate& candidate);
  /// One run per ensemble model; a model that errors abstains.
  std::map<std::string, Phase3Vote> phase3_moe_vote(const Candidate& candidate);
  /// Strict majority of per-model passes; abstentions count as non-pass.
  static bool aggregate_vote(const std::map<std::string, Phase3Vote>& votes);

  VerifierOutcome verify(const Candidate& candidate);

  const VerifierConfig& config() const { return config_; }

 private:
  Detector& primary_;
  std::vector<Detector*> ensemble_;
  AdapterRegistry& adapters_;
  VerifierConfig config_;
};

/// Potential from stored runs: the primary's phase 2 runs plus one run per
/// voting ensemble model, with transferability judged over the ensemble.
PotentialScore outcome_potential(const VerifierOutcome& outcome, const std::string& primary_id);

/// Collects cited tokens, finding lines and reasoning steps from every
/// detection run that flagged the code, plus static findings.
ReflectionDigest extract_digest(const VerifierOutcome& outcome);

/// Builds the verify_result text given to the reflection prompt.
std::string describe_outcome(const VerifierOutcome& outcome);

}  // namespace lineage
