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
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lineage/candidate.hpp"
#include "lineage/generator.hpp"
#include "lineage/transport.hpp"
#include "lineage/verifier.hpp"

namespace lineage {

struct StrategyVerdict {
  std::string strategy_name;
  std::string reason;

  bool operator==(const StrategyVerdict&) const = default;
};

struct RepairDirective {
  int step_index = 0;  // index into the candidate's applied_strategies
  std::string instruction;

  bool operator==(const RepairDirective&) const = default;
};

struct ReflectionResult {
  std::vector<StrategyVerdict> success;
  std::vector<StrategyVerdict> fail;
  std::vector<StrategyDescriptor> new_strategies;
  std::optional<RepairDirective> repair_directive;

  bool empty() const {
    return success.empty() && fail.empty() && new_strategies.empty() && !repair_directive;
  }
  bool operator==(const ReflectionResult&) const = default;
};

class ReflectionBackend {
 public:
  virtual ~ReflectionBackend() = default;
  virtual ReflectionResult reflect(const VerifierOutcome& outcome, const Candidate& candidate,
                                   std::string_view original) = 0;
};

/// Judges each step the candidate added: a step fails when the digest flags
/// a feature of the kind its category claims to hide (or, for transformers
/// that reshape statements, still pins a sink line) and succeeds otherwise.
/// A candidate that broke parsing or behavior gets a repair
/// directive at its last step.
class SimulatedReflector : public ReflectionBackend {
 public:
  ReflectionResult reflect(const VerifierOutcome& outcome, const Candidate& candidate,
                           std::string_view original) override;
};

struct RemoteReflectorOptions {
  std::string model_name;
  double temperature = 0.0;
};

class RemoteReflector : public ReflectionBackend {
 public:
  RemoteReflector(std::shared_ptr<ChatTransport> transport, RemoteReflectorOptions options);
  ReflectionResult reflect(const VerifierOutcome& outcome, const Candidate& candidate,
                           std::string_view original) override;

 private:
  std::shared_ptr<ChatTransport> transport_;
  RemoteReflectorOptions options_;
};

/// Parses a reflection reply. Names not among the candidate's own steps are
/// dropped; a name listed under both keys is kept only as a failure. An
/// optional "new_strategies" list of {strategy_name, category, description}
/// is accepted. Throws FormatError.
ReflectionResult parse_reflection(std::string_view raw, const Candidate& candidate);

/// Runs the backend on a failed outcome. Unparseable replies and transport
/// failures give an empty result. Throws ValidationError on a passing outcome.
ReflectionResult reflect(const VerifierOutcome& outcome, const Candidate& candidate,
                         std::string_view original, ReflectionBackend& backend);

/// Counts failures, retires strategies whose count exceeds threshold_n and
/// appends new strategies under fresh ids. Returns the ids retired by this
/// call.
std::vector<std::string> update_library(StrategyLibrary& library, const ReflectionResult& result,
                                        std::uint32_t threshold_n);

/// The candidate's own steps, from step_begin on.
std::vector<std::string> own_steps(const Candidate& candidate);

}  // namespace lineage
