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

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "lineage/error.hpp"
#include "lineage/random.hpp"
#include "lineage/scoring.hpp"
#include "oracles.hpp"

namespace lineage {
namespace {

std::vector<DetectionRun> runs_of(std::initializer_list<int> scores, const std::string& model = "m") {
  std::vector<DetectionRun> out;
  for (int s : scores) {
    DetectionRun r;
    r.model_id = model;
    r.risk_score = s;
    out.push_back(r);
  }
  return out;
}

std::vector<DetectionRun> typed_runs(const std::vector<std::vector<std::string>>& types) {
  std::vector<DetectionRun> out;
  for (const auto& t : types) {
    DetectionRun r;
    r.model_id = "m";
    r.risk_score = 2;
    r.vuln_types = t;
    out.push_back(r);
  }
  return out;
}

TEST(Evasion, Examples) {
  EXPECT_DOUBLE_EQ(evasion_score(runs_of({5, 5, 5})), 1.0);
  EXPECT_DOUBLE_EQ(evasion_score(runs_of({1, 1})), 0.0);
  EXPECT_NEAR(evasion_score(runs_of({2, 3, 5})), (10.0 / 3.0 - 1.0) / 4.0, 1e-12);
  EXPECT_NEAR(evasion_score(runs_of({2, 3, 5})), 0.5833333333, 1e-9);
}

TEST(Evasion, Errors) {
  EXPECT_THROW(evasion_score({}), ValidationError);
  auto mixed = runs_of({2, 3});
  mixed[1].model_id = "other";
  EXPECT_THROW(evasion_score(mixed), ValidationError);
  EXPECT_THROW(evasion_score(runs_of({0, 3})), ValidationError);
  EXPECT_THROW(evasion_score(runs_of({6})), ValidationError);
}

TEST(SelfConsistency, Examples) {
  auto c = self_consistency(runs_of({5, 5, 5}));
  EXPECT_DOUBLE_EQ(c.sc, 1.0);
  EXPECT_DOUBLE_EQ(c.s_con, 0.0);
  c = self_consistency(runs_of({1, 5}));
  EXPECT_DOUBLE_EQ(c.sc, 0.0);
  EXPECT_DOUBLE_EQ(c.s_con, 1.0);
  c = self_consistency(runs_of({1, 3, 5}));
  EXPECT_NEAR(c.sc, 1.0 - std::sqrt(8.0 / 3.0) / 2.0, 1e-12);
  EXPECT_NEAR(c.sc, 0.1835, 1e-4);
  EXPECT_NEAR(c.s_con, 0.8165, 1e-4);
  EXPECT_THROW(self_consistency({}), ValidationError);
}

TEST(Hallucination, Examples) {
  EXPECT_DOUBLE_EQ(hallucination_score(typed_runs({{"sql-injection"}, {"sql-injection"}})), 0.0);
  EXPECT_DOUBLE_EQ(hallucination_score(typed_runs({{"a"}, {"b"}})), 1.0);
  const double expected = 1.5 / std::log2(3.0);
  EXPECT_NEAR(hallucination_score(typed_runs({{"A", "A"}, {"B"}, {"C"}})), expected, 1e-12);
  EXPECT_NEAR(hallucination_score(typed_runs({{"A", "A"}, {"B"}, {"C"}})), 0.9464, 1e-4);
  EXPECT_DOUBLE_EQ(hallucination_score(typed_runs({{}, {}})), 0.0);
  EXPECT_THROW(hallucination_score({}), ValidationError);
}

TEST(Hallucination, NormalizesTypes) {
  EXPECT_DOUBLE_EQ(hallucination_score(typed_runs({{"SQL-Injection "}, {" sql-injection"}})), 0.0);
  EXPECT_DOUBLE_EQ(hallucination_score(typed_runs({{"xss"}, {"N/A"}})), 0.0);
}

TEST(NormalizeRun, FiveClearsNotApplicable) {
  DetectionRun r;
  r.risk_score = 5;
  r.vuln_types = {"N/A", "n/a"};
  normalize_run(r);
  EXPECT_TRUE(r.vuln_types.empty());
  r.risk_score = 2;
  r.vuln_types = {" XSS ", "N/A"};
  normalize_run(r);
  EXPECT_EQ(r.vuln_types, std::vector<std::string>{"xss"});
  r.risk_score = 0;
  EXPECT_THROW(normalize_run(r), ValidationError);
}

TEST(Transferability, Examples) {
  EXPECT_DOUBLE_EQ(transferability_score({{"a", true}, {"b", true}, {"c", true}, {"d", true}}), 1.0);
  EXPECT_DOUBLE_EQ(transferability_score({{"a", false}, {"b", false}, {"c", false}}), 0.0);
  EXPECT_DOUBLE_EQ(transferability_score({{"a", true}, {"b", true}, {"c", true}, {"d", false}}), 0.75);
  EXPECT_THROW(transferability_score({}), ValidationError);
}

TEST(Potential, AllZero) {
  auto p = potential({{"a", runs_of({1, 1, 1}, "a")}, {"b", runs_of({1}, "b")}},
                     {{"a", false}, {"b", false}});
  EXPECT_DOUBLE_EQ(p.phi, 0.0);
}

TEST(Potential, SingleModelSum) {
  // s_eva 1.0 needs all fives; build the quadruple through potential_with_transfer
  // and check phi is the plain component sum.
  auto runs = runs_of({5, 5, 5}, "a");
  auto p = potential_with_transfer({{"a", runs}}, 1.0);
  EXPECT_DOUBLE_EQ(p.phi, p.per_model.at("a").sum());
  EXPECT_DOUBLE_EQ(p.phi, 2.0);
  ComponentScores c{1.0, 0.5, 0.2, 1.0};
  EXPECT_NEAR(c.sum(), 2.7, 1e-12);
}

TEST(Potential, MeanOverModels) {
  // Model a sums to 2.0 (all fives, s_tr 1), model b to 1.0 (all ones, s_tr 1).
  auto p = potential_with_transfer({{"a", runs_of({5, 5}, "a")}, {"b", runs_of({1, 1}, "b")}}, 1.0);
  EXPECT_DOUBLE_EQ(p.per_model.at("a").sum(), 2.0);
  EXPECT_DOUBLE_EQ(p.per_model.at("b").sum(), 1.0);
  EXPECT_DOUBLE_EQ(p.phi, 1.5);
  // Sums 2.0 and 3.0: add instability and hallucination to b.
  auto b = runs_of({1, 5}, "b");
  b[0].vuln_types = {"x"};
  b[1].vuln_types = {"y"};
  p = potential_with_transfer({{"a", runs_of({5, 5}, "a")}, {"b", b}}, 1.0);
  EXPECT_DOUBLE_EQ(p.per_model.at("b").sum(), 0.5 + 1.0 + 1.0 + 1.0);
  EXPECT_DOUBLE_EQ(p.phi, (2.0 + 3.5) / 2.0);
}

TEST(Potential, KeyMismatch) {
  EXPECT_THROW(potential({{"a", runs_of({5}, "a")}}, {{"b", true}}), ValidationError);
  EXPECT_THROW(potential({}, {}), ValidationError);
  EXPECT_THROW(potential_with_transfer({{"a", runs_of({5}, "a")}}, 1.5), ValidationError);
}

TEST(Potential, IdenticalTransferPerModel) {
  auto p = potential({{"a", runs_of({5}, "a")}, {"b", runs_of({2}, "b")}, {"c", runs_of({5}, "c")}},
                     {{"a", true}, {"b", false}, {"c", true}});
  for (const auto& [m, c] : p.per_model) EXPECT_DOUBLE_EQ(c.s_tr, 2.0 / 3.0);
}

TEST(PassVerdict, Examples) {
  EXPECT_TRUE(pass_verdict(runs_of({5, 5, 5})));
  EXPECT_FALSE(pass_verdict(runs_of({2, 3, 5})));
  EXPECT_TRUE(pass_verdict(runs_of({5, 5, 2})));
  EXPECT_FALSE(pass_verdict(runs_of({5, 5, 2, 2})));
  EXPECT_THROW(pass_verdict({}), ValidationError);
}

TEST(MajorityScore, AgreesWithPassVerdict) {
  Rng rng(17);
  for (int i = 0; i < 2000; ++i) {
    std::vector<DetectionRun> runs(1 + rng.below(7));
    for (auto& r : runs) r.risk_score = 1 + static_cast<int>(rng.below(5));
    EXPECT_EQ(majority_score(runs) == 5, pass_verdict(runs));
  }
  EXPECT_EQ(majority_score(runs_of({2, 3, 5})), 3);
}

class RandomRunSets : public ::testing::Test {
 protected:
  static std::vector<DetectionRun> draw(Rng& rng, std::vector<int>& scores,
                                        std::vector<std::string>& types) {
    static const char* kTypes[] = {"a", "b", "c", "d", "e"};
    std::vector<DetectionRun> runs(1 + rng.below(9));
    scores.clear();
    types.clear();
    for (auto& r : runs) {
      r.model_id = "m";
      r.risk_score = 1 + static_cast<int>(rng.below(5));
      scores.push_back(r.risk_score);
      const auto k = rng.below(3);
      for (std::uint64_t j = 0; j < k; ++j) {
        r.vuln_types.push_back(kTypes[rng.below(5)]);
        types.push_back(r.vuln_types.back());
      }
    }
    return runs;
  }
};

TEST_F(RandomRunSets, OracleAgreement) {
  Rng rng(123);
  std::vector<int> scores;
  std::vector<std::string> types;
  for (int i = 0; i < 1000; ++i) {
    const auto runs = draw(rng, scores, types);
    ASSERT_NEAR(evasion_score(runs), oracle::evasion(scores), 1e-9);
    ASSERT_NEAR(self_consistency(runs).sc, oracle::stability(scores), 1e-9);
    ASSERT_NEAR(hallucination_score(runs), oracle::normalized_entropy(types), 1e-9);
  }
}

TEST_F(RandomRunSets, RangesAndPermutationInvariance) {
  Rng rng(321);
  std::vector<int> scores;
  std::vector<std::string> types;
  for (int i = 0; i < 500; ++i) {
    auto runs = draw(rng, scores, types);
    const double eva = evasion_score(runs);
    const auto con = self_consistency(runs);
    const double hal = hallucination_score(runs);
    for (double v : {eva, con.sc, con.s_con, hal}) {
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
    }
    const bool pass = pass_verdict(runs);
    for (int k = 0; k < 3; ++k) {
      for (std::size_t j = runs.size(); j > 1; --j) std::swap(runs[j - 1], runs[rng.below(j)]);
      ASSERT_NEAR(evasion_score(runs), eva, 1e-12);
      ASSERT_NEAR(self_consistency(runs).sc, con.sc, 1e-12);
      ASSERT_NEAR(hallucination_score(runs), hal, 1e-12);
      ASSERT_EQ(pass_verdict(runs), pass);
    }
  }
}

TEST_F(RandomRunSets, DuplicateRunNeverLowersStability) {
  Rng rng(99);
  std::vector<int> scores;
  std::vector<std::string> types;
  for (int i = 0; i < 500; ++i) {
    auto runs = draw(rng, scores, types);
    auto distinct = [](const std::vector<DetectionRun>& rs) {
      std::set<std::string> s;
      for (const auto& r : rs) s.insert(r.vuln_types.begin(), r.vuln_types.end());
      return s.size();
    };
    const double sc = self_consistency(runs).sc;
    const auto types_before = distinct(runs);
    // Duplicate a run sitting at the median: its deviation is minimal.
    std::vector<DetectionRun> sorted = runs;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.risk_score < b.risk_score; });
    runs.push_back(sorted[sorted.size() / 2]);
    ASSERT_GE(self_consistency(runs).sc + 1e-12, sc);
    ASSERT_LE(distinct(runs), types_before);
  }
}

TEST_F(RandomRunSets, PhiIsMeanOfSums) {
  Rng rng(5);
  std::vector<int> scores;
  std::vector<std::string> types;
  for (int i = 0; i < 200; ++i) {
    std::map<std::string, std::vector<DetectionRun>> per_model;
    std::map<std::string, bool> pass;
    const auto models = 1 + rng.below(4);
    for (std::uint64_t m = 0; m < models; ++m) {
      const std::string id = "m" + std::to_string(m);
      auto runs = draw(rng, scores, types);
      for (auto& r : runs) r.model_id = id;
      pass[id] = pass_verdict(runs);
      per_model[id] = runs;
    }
    const auto p = potential(per_model, pass);
    double mean = 0.0;
    for (const auto& [id, c] : p.per_model) mean += c.sum();
    mean /= static_cast<double>(p.per_model.size());
    ASSERT_NEAR(p.phi, mean, 1e-9);
    ASSERT_GE(p.phi, 0.0);
    ASSERT_LE(p.phi, 4.0);
  }
}

}  // namespace
}  // namespace lineage
