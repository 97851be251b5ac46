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

#include <gtest/gtest.h>

#include "lineage/error.hpp"
#include "lineage/prompts.hpp"
#include "lineage/reflection.hpp"
#include "support.hpp"

namespace lineage {
namespace {

using testing::FakeTransport;

Candidate two_step_candidate() {
  Candidate c;
  c.candidate_id = 9;
  c.code = "x = 1\n";
  c.transform_meta.applied_strategies = {"identifier-rename", "dynamic-attribute-indirection",
                                         "string-split-and-join"};
  c.step_begin = 1;
  return c;
}

VerifierOutcome failed_with(std::vector<std::string> features, std::vector<int> lines = {}) {
  VerifierOutcome o;
  o.admitted = true;
  o.phase1.parse_ok = true;
  o.feedback_digest.flagged_features = std::move(features);
  o.feedback_digest.flagged_lines = std::move(lines);
  for (const auto& f : o.feedback_digest.flagged_features) {
    o.feedback_digest.reasoning_excerpts.push_back("Step 1: `" + f + "` reaches a sink.");
  }
  return o;
}

TEST(OwnSteps, SkipsInheritedPrefix) {
  EXPECT_EQ(own_steps(two_step_candidate()),
            (std::vector<std::string>{"dynamic-attribute-indirection", "string-split-and-join"}));
  Candidate c = two_step_candidate();
  c.step_begin = 10;
  EXPECT_TRUE(own_steps(c).empty());
}

TEST(SimulatedReflector, BlamesTheCategoryThatShouldHaveHiddenTheFeature) {
  SimulatedReflector r;
  // A cited call is control-flow territory; the string step is cleared.
  const auto out = reflect(failed_with({"pickle.loads"}), two_step_candidate(), "", r);
  ASSERT_EQ(out.fail.size(), 1u);
  EXPECT_EQ(out.fail[0].strategy_name, "dynamic-attribute-indirection");
  EXPECT_NE(out.fail[0].reason.find("`pickle.loads`"), std::string::npos);
  ASSERT_EQ(out.success.size(), 1u);
  EXPECT_EQ(out.success[0].strategy_name, "string-split-and-join");
  EXPECT_FALSE(out.repair_directive);
}

TEST(SimulatedReflector, LiteralBlamesDataFlow) {
  SimulatedReflector r;
  const auto out = reflect(failed_with({"\"0.0.0.0\""}), two_step_candidate(), "", r);
  ASSERT_EQ(out.fail.size(), 1u);
  EXPECT_EQ(out.fail[0].strategy_name, "string-split-and-join");
}

TEST(SimulatedReflector, ReshapingStepFailsWhileSinkLineIsPinned) {
  Candidate c = two_step_candidate();
  c.transform_meta.applied_strategies = {"opaque-predicate-wrap"};
  c.step_begin = 0;
  SimulatedReflector r;
  const auto out = reflect(failed_with({}, {4}), c, "", r);
  ASSERT_EQ(out.fail.size(), 1u);
  EXPECT_NE(out.fail[0].reason.find("line 4"), std::string::npos);
  const auto clear = reflect(failed_with({}), c, "", r);
  EXPECT_TRUE(clear.fail.empty());
}

TEST(SimulatedReflector, CorruptedCandidateGetsRepairDirective) {
  VerifierOutcome o;
  o.phase1.parse_ok = false;
  SimulatedReflector r;
  const auto out = reflect(o, two_step_candidate(), "", r);
  ASSERT_TRUE(out.repair_directive);
  EXPECT_EQ(out.repair_directive->step_index, 2);
  EXPECT_NE(out.repair_directive->instruction.find("string-split-and-join"), std::string::npos);
  EXPECT_NE(out.repair_directive->instruction.find("parses"), std::string::npos);
  ASSERT_FALSE(out.fail.empty());
  EXPECT_EQ(out.fail.back().strategy_name, "string-split-and-join");

  VerifierOutcome changed;
  changed.phase1.parse_ok = true;
  changed.semantic_ok = false;
  const auto out2 = reflect(changed, two_step_candidate(), "", r);
  ASSERT_TRUE(out2.repair_directive);
  EXPECT_NE(out2.repair_directive->instruction.find("behaves exactly like the original"),
            std::string::npos);
}

TEST(Reflect, PassingOutcomeIsRejected) {
  VerifierOutcome o;
  o.pass = true;
  SimulatedReflector r;
  EXPECT_THROW(reflect(o, two_step_candidate(), "", r), ValidationError);
}

TEST(UpdateLibrary, RetiresAfterThresholdIsExceeded) {
  auto lib = StrategyLibrary::seed();
  ReflectionResult res;
  res.fail = {{"call-table-dispatch", "cited"}};
  for (int i = 0; i < 3; ++i) EXPECT_TRUE(update_library(lib, res, 3).empty());
  EXPECT_EQ(lib.find("call-table-dispatch")->fail_count, 3u);
  EXPECT_FALSE(lib.find("call-table-dispatch")->retired);
  EXPECT_EQ(update_library(lib, res, 3), std::vector<std::string>{"call-table-dispatch"});
  EXPECT_TRUE(lib.find("call-table-dispatch")->retired);
  // Already retired: counted but not reported again.
  EXPECT_TRUE(update_library(lib, res, 3).empty());
  EXPECT_EQ(lib.find("call-table-dispatch")->fail_count, 5u);

  // The retired strategy is listed under the failed policy for the next plan.
  const std::string p = prompts::policy_section(lib.descriptors(), {});
  const auto failed = p.find("failed_policy:");
  ASSERT_NE(failed, std::string::npos);
  EXPECT_NE(p.find("call-table-dispatch", failed), std::string::npos);
  EXPECT_EQ(p.find("call-table-dispatch"), p.find("call-table-dispatch", failed));
}

TEST(UpdateLibrary, SuccessDoesNotCount) {
  auto lib = StrategyLibrary::seed();
  ReflectionResult res;
  res.success = {{"identifier-rename", ""}};
  res.fail = {{"not-in-library", ""}};
  const auto before = lib;
  EXPECT_TRUE(update_library(lib, res, 0).empty());
  EXPECT_EQ(lib, before);
}

TEST(UpdateLibrary, EmptyResultLeavesLibraryUnchanged) {
  auto lib = StrategyLibrary::seed();
  const auto before = lib;
  update_library(lib, ReflectionResult{}, 3);
  EXPECT_EQ(lib, before);
}

TEST(UpdateLibrary, NewStrategiesGetFreshIds) {
  auto lib = StrategyLibrary::seed();
  const auto n = lib.descriptors().size();
  ReflectionResult res;
  StrategyDescriptor d;
  d.strategy_id = "identifier-rename";
  d.category = StrategyCategory::kLayout;
  d.fail_count = 7;
  d.retired = true;
  res.new_strategies = {d, d};
  d.strategy_id = "homoglyph-identifiers";
  res.new_strategies.push_back(d);
  update_library(lib, res, 3);
  ASSERT_EQ(lib.descriptors().size(), n + 3);
  for (const char* id : {"identifier-rename-2", "identifier-rename-3", "homoglyph-identifiers"}) {
    const auto* got = lib.find(id);
    ASSERT_NE(got, nullptr) << id;
    EXPECT_EQ(got->source, StrategySource::kReflectionLearned);
    EXPECT_EQ(got->fail_count, 0u);
    EXPECT_FALSE(got->retired);
  }
}

TEST(ParseReflection, Golden) {
  const auto out = parse_reflection(R"({
    "success": [{"strategy_name": "String Split And Join", "reason": "literal hidden"}],
    "fail": [{"strategy_name": "dynamic_attribute_indirection", "reason": "`pickle.loads` cited"},
             {"strategy_name": "identifier-rename", "reason": "inherited, not ours"},
             {"strategy_name": "made-up", "reason": "?"}],
    "new_strategies": [{"strategy_name": "homoglyph-identifiers", "category": "layout",
                        "description": "swap letters for look-alikes"},
                       {"strategy_name": "nameless-category", "category": "nonsense"}]
  })", two_step_candidate());
  ASSERT_EQ(out.success.size(), 1u);
  EXPECT_EQ(out.success[0].strategy_name, "string-split-and-join");
  ASSERT_EQ(out.fail.size(), 1u);
  EXPECT_EQ(out.fail[0].strategy_name, "dynamic-attribute-indirection");
  EXPECT_EQ(out.fail[0].reason, "`pickle.loads` cited");
  ASSERT_EQ(out.new_strategies.size(), 1u);
  EXPECT_EQ(out.new_strategies[0].strategy_id, "homoglyph-identifiers");
  EXPECT_EQ(out.new_strategies[0].category, StrategyCategory::kLayout);
}

TEST(ParseReflection, FencedNoisyAndConflicting) {
  const auto out = parse_reflection(
      "Here is my analysis.\n```json\n{\"success\": [{\"strategy_name\": \"string-split-and-join\"},],\n"
      " \"fail\": [{\"strategy_name\": \"string-split-and-join\", \"reason\": \"both\"}],}\n```\nDone.",
      two_step_candidate());
  EXPECT_TRUE(out.success.empty());
  ASSERT_EQ(out.fail.size(), 1u);
  EXPECT_EQ(out.fail[0].reason, "both");
}

TEST(ParseReflection, Errors) {
  EXPECT_THROW(parse_reflection("no json here", two_step_candidate()), FormatError);
  EXPECT_THROW(parse_reflection(R"({"verdict": "ok"})", two_step_candidate()), FormatError);
  EXPECT_THROW(parse_reflection(R"({"fail": "everything"})", two_step_candidate()), FormatError);
}

TEST(RemoteReflector, PromptAndUnparseableReply) {
  auto transport = std::make_shared<FakeTransport>(std::vector<std::string>{"I refuse to answer."});
  RemoteReflector r(transport, {"judge", 0.0});
  const auto out = reflect(failed_with({"pickle.loads"}), two_step_candidate(), "ORIGINAL SOURCE", r);
  EXPECT_TRUE(out.empty());
  const auto reqs = transport->requests();
  ASSERT_EQ(reqs.size(), 1u);
  const std::string& p = reqs[0].messages.at(0).content;
  EXPECT_NE(p.find("Original code:\nORIGINAL SOURCE"), std::string::npos);
  EXPECT_NE(p.find("1. dynamic-attribute-indirection\n2. string-split-and-join"), std::string::npos);
  EXPECT_EQ(p.find("1. identifier-rename"), std::string::npos);
  EXPECT_NE(p.find("pickle.loads"), std::string::npos);
}

TEST(RemoteReflector, OutageGivesEmptyResult) {
  auto dead = std::make_shared<testing::DeadTransport>();
  RemoteReflector r(dead, {"judge", 0.0});
  EXPECT_TRUE(reflect(failed_with({"x"}), two_step_candidate(), "", r).empty());
  EXPECT_EQ(dead->calls.load(), 1);
}

}  // namespace
}  // namespace lineage
