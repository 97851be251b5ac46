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

#include "lineage/semantic.hpp"

#include <algorithm>

#include "lineage/error.hpp"
#include "lineage/pysub.hpp"
#include "lineage/subprocess.hpp"
#include "lineage/transforms.hpp"

namespace lineage {

std::string_view to_string(SemanticHookKind k) {
  switch (k) {
    case SemanticHookKind::kFixtureTests:
      return "fixture-tests";
    case SemanticHookKind::kDeclaredGuarantee:
      return "declared-guarantee";
    case SemanticHookKind::kExternal:
      return "external";
  }
  return "fixture-tests";
}

std::optional<SemanticHookKind> semantic_hook_from_string(std::string_view s) {
  for (auto k : {SemanticHookKind::kFixtureTests, SemanticHookKind::kDeclaredGuarantee,
                 SemanticHookKind::kExternal}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

bool FixtureTestChecker::equivalent(std::string_view original, const Candidate& candidate,
                                    std::string& detail) {
  if (!cached_result_ || cached_original_ != original) {
    cached_original_ = std::string(original);
    cached_result_ = pysub::run_test_suite(original, tests_);
  }
  const auto& base = *cached_result_;
  if (!base.all_passed()) {
    detail = "original program fails its own tests: " + base.error;
    return false;
  }
  const auto got = pysub::run_test_suite(candidate.code, tests_);
  if (!got.parse_ok) {
    detail = "candidate does not parse: " + got.error;
    return false;
  }
  if (!got.all_passed()) {
    detail = "candidate fails tests";
    for (const auto& [name, ok] : got.tests) {
      if (!ok) detail += " " + name;
    }
    if (!got.error.empty()) detail += ": " + got.error;
    return false;
  }
  if (got.tests != base.tests) {
    detail = "candidate runs a different set of tests";
    return false;
  }
  if (got.effects != base.effects) {
    const auto mismatch = std::mismatch(got.effects.begin(), got.effects.end(), base.effects.begin(),
                                        base.effects.end());
    detail = "effects differ at entry " +
             std::to_string(mismatch.first - got.effects.begin()) + ": got '" +
             (mismatch.first == got.effects.end() ? std::string("<end>") : *mismatch.first) +
             "', expected '" +
             (mismatch.second == base.effects.end() ? std::string("<end>") : *mismatch.second) + "'";
    return false;
  }
  return true;
}

bool DeclaredGuaranteeChecker::equivalent(std::string_view, const Candidate& candidate,
                                          std::string& detail) {
  for (const auto& id : candidate.transform_meta.applied_strategies) {
    if (find_builtin(id) == nullptr) {
      detail = "strategy " + id + " carries no equivalence guarantee";
      return false;
    }
  }
  std::string error;
  if (candidate.language_tag == pysub::kLanguageTag && !pysub::parses(candidate.code, &error)) {
    detail = "candidate does not parse: " + error;
    return false;
  }
  return true;
}

ExternalCommandChecker::ExternalCommandChecker(std::vector<std::string> command,
                                               std::chrono::milliseconds timeout)
    : command_(std::move(command)), timeout_(timeout) {
  if (command_.empty()) throw ValidationError("external semantic hook needs a command");
}

bool ExternalCommandChecker::equivalent(std::string_view original, const Candidate& candidate,
                                        std::string& detail) {
  TempFile orig(original, ".py");
  TempFile cand(candidate.code, ".py");
  std::vector<std::string> argv;
  for (auto arg : command_) {
    for (const auto& [key, path] : {std::pair<std::string, std::string>{"{original}", orig.path()},
                                    {"{candidate}", cand.path()}}) {
      for (auto pos = arg.find(key); pos != std::string::npos; pos = arg.find(key, pos + path.size())) {
        arg.replace(pos, key.size(), path);
      }
    }
    argv.push_back(std::move(arg));
  }
  const auto r = run_process(argv, timeout_);
  if (!r.launched) {
    detail = "semantic hook could not start: " + command_.front();
    return false;
  }
  if (r.timed_out) {
    detail = "semantic hook timed out";
    return false;
  }
  if (r.exit_code != 0) {
    detail = "semantic hook exited " + std::to_string(r.exit_code);
    if (!r.err.empty()) detail += ": " + r.err.substr(0, 200);
    return false;
  }
  return true;
}

std::unique_ptr<SemanticChecker> make_semantic_checker(const SemanticHookSpec& spec) {
  switch (spec.kind) {
    case SemanticHookKind::kFixtureTests:
      return std::make_unique<FixtureTestChecker>(spec.tests);
    case SemanticHookKind::kDeclaredGuarantee:
      return std::make_unique<DeclaredGuaranteeChecker>();
    case SemanticHookKind::kExternal:
      return std::make_unique<ExternalCommandChecker>(spec.command, spec.timeout);
  }
  throw ValidationError("unknown semantic hook");
}

bool semantic_check(std::string_view original, const Candidate& candidate, SemanticChecker& checker,
                    std::string& log) {
  std::string detail;
  try {
    if (checker.equivalent(original, candidate, detail)) return true;
    log = "candidate " + std::to_string(candidate.candidate_id) + " rejected: " + detail;
  } catch (const std::exception& e) {
    log = "candidate " + std::to_string(candidate.candidate_id) + " rejected, semantic hook failed: " +
          e.what();
  }
  return false;
}

}  // namespace lineage
