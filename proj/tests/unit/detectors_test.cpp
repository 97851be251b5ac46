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

#include "lineage/detectors.hpp"
#include "lineage/error.hpp"
#include "lineage/fixtures.hpp"
#include "lineage/json_repair.hpp"
#include "lineage/prompts.hpp"
#include "lineage/pysub.hpp"
#include "lineage/transforms.hpp"
#include "support.hpp"

namespace lineage {
namespace {

const DetectionRule kPickle{"pickle.loads", 1, "unsafe-deserialization"};

BlindSpotConfig blind(int depth, double confusion = 0.0, double jitter = 0.0, std::uint64_t seed = 1) {
  BlindSpotConfig b;
  b.base_rules = {kPickle};
  b.indirection_blindness_depth = depth;
  b.type_confusion_prob = confusion;
  b.score_jitter_prob = jitter;
  b.seed = seed;
  return b;
}

std::string pickle_code() { return find_fixture("avoid-pickle")->code; }

std::string hidden_pickle_code() {
  Rng rng(1);
  return pysub::print(dynamic_attribute_indirection(pysub::parse(pickle_code()), rng).module);
}

TEST(SimulatedDetector, DirectRuleHit) {
  SimulatedDetector d("m", blind(1));
  const auto run = d.detect(pickle_code(), {});
  EXPECT_EQ(run.risk_score, 1);
  EXPECT_EQ(run.vuln_types, std::vector<std::string>{"unsafe-deserialization"});
  EXPECT_EQ(run.model_id, "m");
  EXPECT_FALSE(run.reasoning_chain.empty());
  EXPECT_EQ(run.finding_lines, std::vector<int>{4});
  EXPECT_EQ(d.calls(), 1u);
}

TEST(SimulatedDetector, BlindAtDepth) {
  SimulatedDetector d("m", blind(1));
  DetectionContext ctx;
  ctx.indirection_depth = 1;
  const auto run = d.detect(hidden_pickle_code(), ctx);
  EXPECT_EQ(run.risk_score, 5);
  EXPECT_TRUE(run.vuln_types.empty());
  // Below the blindness depth the indirection is seen through.
  SimulatedDetector sharp("m", blind(2));
  const auto seen = sharp.detect(hidden_pickle_code(), ctx);
  EXPECT_EQ(seen.risk_score, 1);
  bool cites = false;
  for (const auto& s : seen.reasoning_chain) cites = cites || s.find("`pickle.loads`") != std::string::npos;
  EXPECT_TRUE(cites);
}

TEST(SimulatedDetector, ConfusionFrequency) {
  SimulatedDetector d("m", blind(1, 0.5, 0.0, 77));
  int confused = 0;
  for (int i = 0; i < 1000; ++i) {
    DetectionContext ctx;
    ctx.candidate_id = static_cast<CandidateId>(i);
    const auto run = d.detect(pickle_code(), ctx);
    ASSERT_EQ(run.vuln_types.size(), 1u);
    confused += run.vuln_types[0] != "unsafe-deserialization";
  }
  EXPECT_NEAR(confused / 1000.0, 0.5, 0.05);
}

TEST(SimulatedDetector, JitterStaysInRange) {
  SimulatedDetector d("m", blind(1, 0.0, 1.0, 5));
  std::set<int> seen;
  for (int r = 0; r < 50; ++r) {
    DetectionContext ctx;
    ctx.round_index = r;
    const int s = d.detect(pickle_code(), ctx).risk_score;
    ASSERT_GE(s, 1);
    ASSERT_LE(s, 5);
    seen.insert(s);
  }
  EXPECT_EQ(seen, (std::set<int>{1, 2}));
}

TEST(SimulatedDetector, Deterministic) {
  SimulatedDetector a("m", blind(1, 0.4, 0.4, 9));
  SimulatedDetector b("m", blind(1, 0.4, 0.4, 9));
  for (int i = 0; i < 100; ++i) {
    DetectionContext ctx;
    ctx.candidate_id = static_cast<CandidateId>(i % 7);
    ctx.round_index = i % 3;
    EXPECT_EQ(a.detect(pickle_code(), ctx), b.detect(pickle_code(), ctx));
  }
}

TEST(SimulatedDetector, DepthNeverIncreasesHits) {
  for (const auto& f : fixture_programs()) {
    BlindSpotConfig b;
    b.base_rules = {f.rule};
    b.indirection_blindness_depth = 2;
    SimulatedDetector d("m", b);
    Rng rng(3);
    pysub::Module m = pysub::parse(f.code);
    int depth = 0;
    std::size_t hits = d.fired_rules(pysub::print(m), depth).size();
    for (const auto& t : builtin_transforms()) {
      const auto r = t.apply(m, rng);
      if (!r.applied) continue;
      m = r.module;
      depth += t.depth_increment;
      const auto now = d.fired_rules(pysub::print(m), depth).size();
      ASSERT_LE(now, hits) << f.label << " after " << t.id;
      hits = now;
    }
  }
}

TEST(SimulatedDetector, EmptyCodeRejected) {
  SimulatedDetector d("m", blind(1));
  EXPECT_THROW(d.detect("", {}), ValidationError);
  EXPECT_EQ(d.calls(), 0u);
}

TEST(BlindSpotConfig, Validation) {
  auto b = blind(1);
  EXPECT_NO_THROW(b.validate());
  b.type_confusion_prob = 1.5;
  EXPECT_THROW(b.validate(), ValidationError);
  b = blind(0);
  EXPECT_THROW(b.validate(), ValidationError);
  b = blind(1);
  b.base_rules[0].pattern = "";
  EXPECT_THROW(b.validate(), ValidationError);
  b = blind(1);
  b.base_rules[0].score = 5;
  EXPECT_THROW(b.validate(), ValidationError);
}

TEST(DetectorSpec, RemoteNeedsEndpointAndModel) {
  DetectorSpec s;
  s.detector_id = "r";
  s.kind = DetectorKind::kRemote;
  EXPECT_THROW(s.validate(), ValidationError);
  s.endpoint = "http://localhost:1/v1/chat/completions";
  EXPECT_THROW(s.validate(), ValidationError);
  s.model_name = "m";
  EXPECT_NO_THROW(s.validate());
  DetectorSpec sim;
  sim.detector_id = "s";
  EXPECT_THROW(sim.validate(), ValidationError);
}

constexpr const char* kCleanReply = R"({
  "score": "5",
  "vulnerabilities": [
    {"position": "N/A", "type": "N/A", "description": "N/A",
     "reasoning_chain": ["Step 1: read the code", "Step 2: nothing found"]}
  ]
})";

TEST(ParseReport, CleanReply) {
  const auto run = parse_report(kCleanReply);
  EXPECT_EQ(run.risk_score, 5);
  EXPECT_TRUE(run.vuln_types.empty());
  EXPECT_EQ(run.reasoning_chain.size(), 2u);
  EXPECT_EQ(run.raw_text, kCleanReply);
}

TEST(ParseReport, FencedWithProse) {
  const std::string noisy = std::string("Sure! Here is my analysis:\n```json\n") + kCleanReply +
                            "\n```\nLet me know if you need more.";
  auto a = parse_report(kCleanReply);
  auto b = parse_report(noisy);
  a.raw_text.clear();
  b.raw_text.clear();
  EXPECT_EQ(a, b);
}

TEST(ParseReport, FindingsAndRepair) {
  const auto run = parse_report(R"(Analysis follows.
{"score": 2, "vulnerabilities": [
  {"position": "4", "type": " Unsafe-Deserialization ", "description": "x",
   "reasoning_chain": ["Step 1: `pickle.loads` in `load_session`",],},
],})");
  EXPECT_EQ(run.risk_score, 2);
  EXPECT_EQ(run.vuln_types, std::vector<std::string>{"unsafe-deserialization"});
  EXPECT_EQ(run.finding_lines, std::vector<int>{4});
  ASSERT_EQ(run.reasoning_chain.size(), 1u);
}

TEST(ParseReport, RejectsOutOfSchemaScores) {
  EXPECT_THROW(parse_report(R"({"score": "0", "vulnerabilities": []})"), FormatError);
  EXPECT_THROW(parse_report(R"({"score": 6})"), FormatError);
  EXPECT_THROW(parse_report(R"({"score": "high"})"), FormatError);
  EXPECT_THROW(parse_report(R"({"vulnerabilities": []})"), FormatError);
  EXPECT_THROW(parse_report("no json here"), FormatError);
  EXPECT_THROW(parse_report(""), FormatError);
}

TEST(ParseReport, TotalOnGarbage) {
  Rng rng(31);
  const std::string alphabet = "{}[]\":,5 abc\n`'\\";
  for (int i = 0; i < 3000; ++i) {
    std::string s;
    const auto n = rng.below(40);
    for (std::uint64_t j = 0; j < n; ++j) s.push_back(alphabet[rng.below(alphabet.size())]);
    try {
      const auto run = parse_report(s);
      ASSERT_GE(run.risk_score, 1);
      ASSERT_LE(run.risk_score, 5);
    } catch (const FormatError&) {
    }
  }
}

TEST(JsonRepair, OnlyMechanicalFixes) {
  EXPECT_EQ(strip_trailing_commas(R"({"a": [1, 2,], "b": "x,]",})"), R"({"a": [1, 2], "b": "x,]"})");
  EXPECT_THROW(extract_json_object("{'single': 1}"), FormatError);
  EXPECT_EQ(extract_json_object("text {\"a\": {\"b\": 1}} more {\"c\": 2}")["a"]["b"], 1);
}

TEST(RemoteDetector, RendersPromptAndParses) {
  auto transport = std::make_shared<testing::FakeTransport>(std::vector<std::string>{kCleanReply});
  DetectorSpec s;
  s.detector_id = "remote-1";
  s.kind = DetectorKind::kRemote;
  s.endpoint = "http://unused";
  s.model_name = "judge";
  auto d = make_detector(s, transport);
  DetectionContext ctx;
  ctx.temperature = 0.6;
  ctx.paraphrase = true;
  const auto run = d->detect("print(1)\n", ctx);
  EXPECT_EQ(run.risk_score, 5);
  EXPECT_EQ(run.model_id, "remote-1");
  EXPECT_TRUE(run.paraphrased);
  const auto reqs = transport->requests();
  ASSERT_EQ(reqs.size(), 1u);
  EXPECT_EQ(reqs[0].model, "judge");
  EXPECT_DOUBLE_EQ(reqs[0].temperature, 0.6);
  EXPECT_EQ(reqs[0].messages[0].content, prompts::detector_prompt("print(1)\n", true));
  EXPECT_NE(reqs[0].messages[0].content.find("print(1)"), std::string::npos);
}

TEST(RemoteDetector, FormatErrorsSurface) {
  auto transport = std::make_shared<testing::FakeTransport>(std::vector<std::string>{"I refuse."});
  DetectorSpec s;
  s.detector_id = "r";
  s.kind = DetectorKind::kRemote;
  s.endpoint = "http://unused";
  s.model_name = "judge";
  auto d = make_detector(s, transport);
  EXPECT_THROW(d->detect("x = 1\n", {}), FormatError);
}

}  // namespace
}  // namespace lineage
