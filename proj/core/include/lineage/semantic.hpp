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

// Behavioral-equivalence checks run on candidates before any detector sees
// them.

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lineage/candidate.hpp"
#include "lineage/interpreter.hpp"

namespace lineage {

enum class SemanticHookKind { kFixtureTests, kDeclaredGuarantee, kExternal };

std::string_view to_string(SemanticHookKind k);
std::optional<SemanticHookKind> semantic_hook_from_string(std::string_view s);

struct SemanticHookSpec {
  SemanticHookKind kind = SemanticHookKind::kFixtureTests;
  std::string tests;                 // fixture-tests: test module source
  std::vector<std::string> command;  // external: "{original}" and "{candidate}" become file paths
  std::chrono::milliseconds timeout{60000};

  bool operator==(const SemanticHookSpec&) const = default;
};

class SemanticChecker {
 public:
  virtual ~SemanticChecker() = default;
  /// True iff the candidate behaves like the original. May throw; callers go
  /// through semantic_check.
  virtual bool equivalent(std::string_view original, const Candidate& candidate,
                          std::string& detail) = 0;
};

/// Runs the test module against both programs; equivalent when every test
/// passes on the candidate and both runs record the same effects and test
/// results.
class FixtureTestChecker : public SemanticChecker {
 public:
  explicit FixtureTestChecker(std::string tests) : tests_(std::move(tests)) {}
  bool equivalent(std::string_view original, const Candidate& candidate, std::string& detail) override;

 private:
  std::string tests_;
  std::string cached_original_;
  std::optional<pysub::TestSuiteResult> cached_result_;
};

/// Trusts the built-in transformers: equivalent when every applied strategy
/// is built in and the candidate parses.
class DeclaredGuaranteeChecker : public SemanticChecker {
 public:
  bool equivalent(std::string_view original, const Candidate& candidate, std::string& detail) override;
};

/// Equivalent when the command exits 0.
class ExternalCommandChecker : public SemanticChecker {
 public:
  ExternalCommandChecker(std::vector<std::string> command, std::chrono::milliseconds timeout);
  bool equivalent(std::string_view original, const Candidate& candidate, std::string& detail) override;

 private:
  std::vector<std::string> command_;
  std::chrono::milliseconds timeout_;
};

std::unique_ptr<SemanticChecker> make_semantic_checker(const SemanticHookSpec& spec);

/// Calls the checker; a checker that throws counts as a rejection. The
/// reason for any rejection is written to `log`.
bool semantic_check(std::string_view original, const Candidate& candidate, SemanticChecker& checker,
                    std::string& log);

}  // namespace lineage
