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

#include "lineage/fixtures.hpp"
#include "lineage/interpreter.hpp"
#include "lineage/pysub.hpp"
#include "lineage/transforms.hpp"

namespace lineage {
namespace {

using pysub::Module;

std::vector<pysub::TokKind> token_kinds(const std::string& src) {
  std::vector<pysub::TokKind> out;
  for (const auto& t : pysub::tokenize(src)) out.push_back(t.kind);
  return out;
}

bool same_behavior(const FixtureProgram& f, const std::string& code, std::string* why) {
  const auto before = pysub::run_test_suite(f.code, f.tests);
  const auto after = pysub::run_test_suite(code, f.tests);
  if (!after.all_passed()) {
    *why = "suite failed: " + after.error;
    return false;
  }
  if (before.tests != after.tests || before.effects != after.effects) {
    *why = "effects differ";
    return false;
  }
  return true;
}

TEST(Transforms, CatalogueOrderAndDepths) {
  std::vector<std::string> ids;
  for (const auto& t : builtin_transforms()) ids.push_back(t.id);
  EXPECT_EQ(ids, (std::vector<std::string>{"identifier-rename", "dead-branch-insertion",
                                           "dynamic-attribute-indirection", "call-table-dispatch",
                                           "opaque-predicate-wrap", "string-split-and-join"}));
  EXPECT_EQ(find_builtin("identifier-rename")->depth_increment, 0);
  EXPECT_EQ(find_builtin("string-split-and-join")->depth_increment, 1);
  EXPECT_EQ(find_builtin("dynamic-attribute-indirection")->depth_increment, 1);
  EXPECT_EQ(find_builtin("dead-branch-insertion")->depth_increment, 0);
  EXPECT_EQ(find_builtin("opaque-predicate-wrap")->depth_increment, 1);
  EXPECT_EQ(find_builtin("call-table-dispatch")->depth_increment, 1);
  EXPECT_EQ(find_builtin("nope"), nullptr);
}

TEST(Transforms, RenameKeepsTokenStructure) {
  const std::string src = "def add(a, b):\n    total = a + b\n    return total\n";
  Rng rng(1);
  const auto r = identifier_rename(pysub::parse(src), rng);
  ASSERT_TRUE(r.applied);
  const std::string out = pysub::print(r.module);
  EXPECT_EQ(token_kinds(out), token_kinds(pysub::print(pysub::parse(src))));
  EXPECT_EQ(out.find("total"), std::string::npos);
  EXPECT_NE(out.find("def add("), std::string::npos);  // public names stay
}

TEST(Transforms, AttributeIndirectionHidesLiteral) {
  const FixtureProgram* f = find_fixture("avoid-pickle");
  ASSERT_NE(f, nullptr);
  Rng rng(1);
  const auto r = dynamic_attribute_indirection(pysub::parse(f->code), rng);
  ASSERT_TRUE(r.applied);
  const std::string out = pysub::print(r.module);
  EXPECT_EQ(out.find("pickle.loads"), std::string::npos);
  EXPECT_NE(out.find("getattr(pickle, \"loads\")"), std::string::npos);
  // The literal is still recoverable by folding.
  EXPECT_NE(pysub::print(pysub::deobfuscate(r.module)).find("pickle.loads"), std::string::npos);
}

TEST(Transforms, NotApplicableIsIdentity) {
  const Module m = pysub::parse("x = 1\n");
  for (const auto& t : builtin_transforms()) {
    Rng rng(3);
    const auto r = t.apply(m, rng);
    if (!r.applied) EXPECT_EQ(r.module, m) << t.id;
  }
}

TEST(Transforms, SeededAndDeterministic) {
  const FixtureProgram& f = fixture_programs().front();
  const Module m = pysub::parse(f.code);
  for (const auto& t : builtin_transforms()) {
    Rng a(42), b(42);
    EXPECT_EQ(pysub::print(t.apply(m, a).module), pysub::print(t.apply(m, b).module)) << t.id;
  }
}

TEST(Transforms, SingleStepsPreserveEveryFixture) {
  for (const auto& f : fixture_programs()) {
    for (const auto& t : builtin_transforms()) {
      Rng rng(derive_seed(7, {hash_string(f.label), hash_string(t.id)}));
      const std::string code = pysub::print(t.apply(pysub::parse(f.code), rng).module);
      ASSERT_TRUE(pysub::parses(code)) << f.label << " / " << t.id;
      std::string why;
      EXPECT_TRUE(same_behavior(f, code, &why)) << f.label << " / " << t.id << ": " << why;
    }
  }
}

// Every ordered pair, then seeded samples of length three and four. The
// exhaustive depth-four sweep lives in the acceptance binary.
TEST(Transforms, CompositionsPreserveEveryFixture) {
  const auto& all = builtin_transforms();
  Rng pick(2025);
  for (const auto& f : fixture_programs()) {
    std::vector<std::vector<std::size_t>> seqs;
    for (std::size_t i = 0; i < all.size(); ++i) {
      for (std::size_t j = 0; j < all.size(); ++j) seqs.push_back({i, j});
    }
    for (int s = 0; s < 20; ++s) {
      std::vector<std::size_t> seq(3 + pick.below(2));
      for (auto& x : seq) x = pick.below(all.size());
      seqs.push_back(seq);
    }
    for (const auto& seq : seqs) {
      Module m = pysub::parse(f.code);
      Rng rng(derive_seed(9, {hash_string(f.label), seq.size()}));
      std::string names;
      for (auto i : seq) {
        m = all[i].apply(m, rng).module;
        names += all[i].id + " ";
        // Re-parse between steps, as the synthesizer does.
        m = pysub::parse(pysub::print(m));
      }
      const std::string code = pysub::print(m);
      std::string why;
      ASSERT_TRUE(same_behavior(f, code, &why)) << f.label << " / " << names << ": " << why << "\n"
                                               << code;
    }
  }
}

TEST(Transforms, IdentifiersListsEverything) {
  const auto ids = identifiers(pysub::parse("import os\ndef f(a):\n    for i in a:\n        os.x(i)\n"));
  for (const char* want : {"os", "f", "a", "i", "x"}) {
    EXPECT_NE(std::find(ids.begin(), ids.end(), want), ids.end()) << want;
  }
}

}  // namespace
}  // namespace lineage
