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
#include "lineage/fixtures.hpp"
#include "lineage/generator.hpp"
#include "lineage/prompts.hpp"
#include "lineage/pysub.hpp"
#include "lineage/transforms.hpp"
#include "support.hpp"

namespace lineage {
namespace {

constexpr const char* kShell =
    "import os\n"
    "\n"
    "def wipe(path):\n"
    "    cmd = \"rm -rf \" + path\n"
    "    os.system(cmd)\n"
    "    return cmd\n";

Candidate original(const std::string& code) {
  Candidate c;
  c.code = code;
  c.language_tag = std::string(pysub::kLanguageTag);
  return c;
}

ObfuscationPlan single(StrategyCategory cat, const std::string& id) {
  ObfuscationPlan p;
  PlanStep s{"target", id};
  if (cat == StrategyCategory::kLayout) p.layout.push_back(s);
  if (cat == StrategyCategory::kControlFlow) p.control_flow.push_back(s);
  if (cat == StrategyCategory::kDataFlow) p.data_flow.push_back(s);
  return p;
}

TEST(Library, SeedContents) {
  const auto lib = StrategyLibrary::seed();
  EXPECT_EQ(lib.size(), builtin_transforms().size() + 3);
  EXPECT_EQ(lib.usable_count(), lib.size());
  for (const auto& t : builtin_transforms()) {
    const auto* d = lib.find(t.id);
    ASSERT_NE(d, nullptr);
    EXPECT_EQ(d->category, t.category);
    EXPECT_EQ(d->source, StrategySource::kSeedLibrary);
    EXPECT_TRUE(StrategyLibrary::executable(t.id));
  }
  for (const char* remote_only : {"attention-disruption", "cot-instability", "semantic-hallucination"}) {
    EXPECT_NE(lib.find(remote_only), nullptr);
    EXPECT_FALSE(StrategyLibrary::executable(remote_only));
  }
}

TEST(Library, JsonRoundTripAndValidation) {
  auto lib = StrategyLibrary::seed();
  lib.find("call-table-dispatch")->fail_count = 4;
  lib.find("call-table-dispatch")->retired = true;
  lib.mutable_descriptors().push_back({"learned", StrategyCategory::kDataFlow, "d",
                                       StrategySource::kReflectionLearned, 1, false});
  EXPECT_EQ(StrategyLibrary::from_json(lib.to_json()), lib);
  EXPECT_THROW(StrategyLibrary::from_json(nlohmann::json::object()), FormatError);
  auto dup = lib.to_json();
  dup.push_back(dup[0]);
  EXPECT_THROW(StrategyLibrary::from_json(dup), FormatError);
}

TEST(SimulatedPlan, LiteralGoesToDataFlow) {
  SimulatedGenerator gen;
  ReflectionDigest d;
  d.flagged_features = {"\"rm -rf \""};
  const auto p = plan(kShell, d, StrategyLibrary::seed(), gen);
  EXPECT_TRUE(p.layout.empty());
  EXPECT_TRUE(p.control_flow.empty());
  ASSERT_EQ(p.data_flow.size(), 1u);
  EXPECT_EQ(p.data_flow[0].strategy_category, "string-split-and-join");
}

TEST(SimulatedPlan, LiteralAndCallInSchemaOrder) {
  SimulatedGenerator gen;
  ReflectionDigest d;
  d.flagged_features = {"\"rm -rf \"", "os.system"};
  const auto p = plan(kShell, d, StrategyLibrary::seed(), gen);
  EXPECT_TRUE(p.layout.empty());
  ASSERT_EQ(p.control_flow.size(), 1u);
  ASSERT_EQ(p.data_flow.size(), 1u);
  EXPECT_EQ(p.control_flow[0].strategy_category, "dynamic-attribute-indirection");
  EXPECT_EQ(p.ordered_strategies(),
            (std::vector<std::string>{"dynamic-attribute-indirection", "string-split-and-join"}));
  const auto j = p.to_json();
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  EXPECT_EQ(keys.size(), 3u);
}

TEST(SimulatedPlan, SkipsRetiredAndPrefersSeedOrder) {
  SimulatedGenerator gen;
  auto lib = StrategyLibrary::seed();
  lib.find("dynamic-attribute-indirection")->retired = true;
  ReflectionDigest d;
  d.flagged_features = {"os.system"};
  const auto p = plan(kShell, d, lib, gen);
  ASSERT_EQ(p.control_flow.size(), 1u);
  EXPECT_EQ(p.control_flow[0].strategy_category, "call-table-dispatch");
}

TEST(SimulatedPlan, AllRetiredIsGenerationError) {
  SimulatedGenerator gen;
  auto lib = StrategyLibrary::seed();
  for (auto& d : lib.mutable_descriptors()) d.retired = true;
  EXPECT_THROW(plan(kShell, {}, lib, gen), GenerationError);
}

TEST(SimulatedPlan, CitedButNothingAppliesIsGenerationError) {
  SimulatedGenerator gen;
  auto lib = StrategyLibrary::seed();
  lib.find("string-split-and-join")->retired = true;
  ReflectionDigest d;
  d.flagged_features = {"\"rm -rf \""};
  EXPECT_THROW(plan(kShell, d, lib, gen), GenerationError);
}

TEST(SimulatedPlan, EmptyDigestFallsBackToFirstApplicable) {
  SimulatedGenerator gen;
  const auto p = plan(kShell, {}, StrategyLibrary::seed(), gen);
  EXPECT_EQ(p.ordered_strategies(), std::vector<std::string>{"identifier-rename"});
}

TEST(Synthesize, RenameKeepsDepth) {
  SimulatedGenerator gen;
  Candidate parent = original("def add(a, b):\n    s = a + b\n    return s\n");
  parent.transform_meta.indirection_depth = 2;
  const auto out = synthesize(parent, 0, single(StrategyCategory::kLayout, "identifier-rename"), 1,
                              gen, 5, 10);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].candidate_id, 10u);
  EXPECT_EQ(out[0].transform_meta.indirection_depth, 2);
  EXPECT_EQ(out[0].transform_meta.applied_strategies, std::vector<std::string>{"identifier-rename"});
  EXPECT_EQ(pysub::tokenize(out[0].code).size(), pysub::tokenize(parent.code).size());
  EXPECT_NE(out[0].code, parent.code);
}

TEST(Synthesize, AttributeIndirectionAddsDepth) {
  SimulatedGenerator gen;
  const auto out = synthesize(original(kShell), 0,
                              single(StrategyCategory::kControlFlow, "dynamic-attribute-indirection"),
                              1, gen, 5, 1);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].code.find("os.system"), std::string::npos);
  EXPECT_EQ(out[0].transform_meta.indirection_depth, 1);
}

TEST(Synthesize, WidthGivesDistinctVariants) {
  SimulatedGenerator gen;
  const auto out = synthesize(original("def add(a, b):\n    s = a + b\n    return s\n"), 0,
                              single(StrategyCategory::kLayout, "identifier-rename"), 3, gen, 17, 1);
  ASSERT_EQ(out.size(), 3u);
  std::set<CandidateId> ids;
  std::set<std::string> codes;
  for (const auto& c : out) {
    ids.insert(c.candidate_id);
    codes.insert(c.code);
  }
  EXPECT_EQ(ids.size(), 3u);
  EXPECT_EQ(codes.size(), 3u);
}

TEST(Synthesize, PureGivenSeed) {
  SimulatedGenerator gen;
  ObfuscationPlan p = single(StrategyCategory::kLayout, "dead-branch-insertion");
  p.data_flow.push_back({"x", "string-split-and-join"});
  const auto a = synthesize(original(kShell), 0, p, 3, gen, 99, 1);
  const auto b = synthesize(original(kShell), 0, p, 3, gen, 99, 1);
  EXPECT_EQ(a, b);
}

TEST(Synthesize, InheritsParentSteps) {
  SimulatedGenerator gen;
  Candidate parent = original(kShell);
  parent.transform_meta.applied_strategies = {"identifier-rename"};
  const auto out = synthesize(parent, 3, single(StrategyCategory::kDataFlow, "string-split-and-join"),
                              1, gen, 1, 7);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].origin_node, 3u);
  EXPECT_EQ(out[0].step_begin, 1u);
  EXPECT_EQ(out[0].transform_meta.applied_strategies,
            (std::vector<std::string>{"identifier-rename", "string-split-and-join"}));
}

TEST(Synthesize, NothingAppliesIsGenerationError) {
  SimulatedGenerator gen;
  EXPECT_THROW(synthesize(original("x = 1\n"), 0,
                          single(StrategyCategory::kDataFlow, "string-split-and-join"), 2, gen, 1, 1),
               GenerationError);
  EXPECT_THROW(synthesize(original(kShell), 0, single(StrategyCategory::kLayout, "identifier-rename"),
                          0, gen, 1, 1),
               ValidationError);
}

TEST(Synthesize, RetiredNeverApplied) {
  // Run a handful of plan/synthesize rounds with retirements in between.
  SimulatedGenerator gen;
  auto lib = StrategyLibrary::seed();
  Candidate cur = original(find_fixture("avoid-pickle")->code);
  ReflectionDigest d;
  d.flagged_features = {"pickle.loads", "\"abc\"", "session"};
  for (int round = 0; round < 4; ++round) {
    ObfuscationPlan p;
    try {
      p = plan(cur.code, d, lib, gen);
    } catch (const GenerationError&) {
      break;
    }
    const auto out = synthesize(cur, 0, p, 2, gen, static_cast<std::uint64_t>(round), 1);
    for (const auto& c : out) {
      for (std::size_t i = c.step_begin; i < c.transform_meta.applied_strategies.size(); ++i) {
        EXPECT_FALSE(lib.find(c.transform_meta.applied_strategies[i])->retired);
      }
    }
    for (const auto& id : p.ordered_strategies()) lib.find(id)->retired = true;
    cur = out.front();
  }
}

constexpr const char* kPlanReply = R"(Here is the plan.
```json
{
  "Layout": [{"op": "key variables", "strategy_category": "Identifier_Rename"}],
  "Control_Flow": [{"op": "pickle.loads", "strategy_category": "dynamic-attribute-indirection"},],
  "Data_Flow": [{"op": "payload", "strategy_category": "made-up-strategy"}]
}
```)";

TEST(ParsePlan, GoldenReply) {
  const auto p = parse_plan(kPlanReply, StrategyLibrary::seed());
  ASSERT_EQ(p.layout.size(), 1u);
  EXPECT_EQ(p.layout[0].strategy_category, "identifier-rename");
  EXPECT_EQ(p.layout[0].op, "key variables");
  ASSERT_EQ(p.control_flow.size(), 1u);
  EXPECT_TRUE(p.data_flow.empty());
  // A plan's own JSON parses back to itself.
  EXPECT_EQ(parse_plan(p.to_json().dump(), StrategyLibrary::seed()), p);
}

TEST(ParsePlan, Errors) {
  const auto lib = StrategyLibrary::seed();
  EXPECT_THROW(parse_plan("no plan", lib), FormatError);
  EXPECT_THROW(parse_plan(R"({"other": []})", lib), FormatError);
  EXPECT_THROW(parse_plan(R"({"Layout": [{"op": "x", "strategy_category": "unknown"}]})", lib),
               GenerationError);
  auto retired = lib;
  retired.find("identifier-rename")->retired = true;
  EXPECT_THROW(parse_plan(R"({"Layout": [{"op": "x", "strategy_category": "identifier-rename"}]})",
                          retired),
               GenerationError);
}

TEST(RemoteGenerator, PlanningPromptCarriesFailedPolicy) {
  auto transport = std::make_shared<testing::FakeTransport>(std::vector<std::string>{kPlanReply});
  RemoteGenerator gen(transport, {"planner", 0.7, "python-subset"});
  auto lib = StrategyLibrary::seed();
  lib.find("call-table-dispatch")->retired = true;
  lib.find("call-table-dispatch")->fail_count = 4;
  ReflectionDigest d;
  d.flagged_features = {"pickle.loads"};
  d.reasoning_excerpts = {"Step 1: `pickle.loads` is a sink."};
  const auto p = plan("CODE", d, lib, gen, {{"identifier-rename", "string-split-and-join"}});
  EXPECT_FALSE(p.empty());
  const auto reqs = transport->requests();
  ASSERT_EQ(reqs.size(), 1u);
  const std::string& prompt = reqs[0].messages[0].content;
  EXPECT_EQ(prompt, prompts::planning_prompt(
                        "CODE", describe(d),
                        prompts::policy_section(lib.descriptors(),
                                                {{"identifier-rename", "string-split-and-join"}})));
  const auto failed = prompt.find("failed_policy:");
  ASSERT_NE(failed, std::string::npos);
  EXPECT_NE(prompt.find("call-table-dispatch", failed), std::string::npos);
  EXPECT_NE(prompt.find("identifier-rename -> string-split-and-join", failed), std::string::npos);
}

TEST(RemoteGenerator, UnparseablePlanIsGenerationError) {
  auto transport = std::make_shared<testing::FakeTransport>(std::vector<std::string>{"sorry"});
  RemoteGenerator gen(transport, {"planner", 0.7, "python-subset"});
  EXPECT_THROW(plan("CODE", {}, StrategyLibrary::seed(), gen), GenerationError);
}

TEST(RemoteGenerator, SynthesisRejectsUnparseableVariants) {
  auto transport = std::make_shared<testing::FakeTransport>(std::vector<std::string>{
      "```python\ndef f(:\n```", "```python\nimport os\n\ndef wipe(p):\n    getattr(os, \"system\")(p)\n```",
      "no fence, plain text that is not python ("});
  RemoteGenerator gen(transport, {"synth", 0.7, "python-subset"});
  const auto out = synthesize(original(kShell), 0,
                              single(StrategyCategory::kControlFlow, "dynamic-attribute-indirection"),
                              3, gen, 0, 1);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].transform_meta.indirection_depth, 1);
  EXPECT_EQ(transport->requests().size(), 3u);
  EXPECT_NE(transport->requests()[1].messages[0].content.find("variant 2"), std::string::npos);
}

TEST(ExtractCodeBlock, Forms) {
  EXPECT_EQ(extract_code_block("```py\nx = 1\n```"), "x = 1\n");
  EXPECT_EQ(extract_code_block("x = 1\n"), "x = 1\n");
  EXPECT_EQ(extract_code_block("pre\n```\ny = 2\n"), "y = 2\n");
}

}  // namespace
}  // namespace lineage
