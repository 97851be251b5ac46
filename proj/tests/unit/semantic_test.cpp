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
#include "lineage/pysub.hpp"
#include "lineage/semantic.hpp"
#include "lineage/transforms.hpp"

namespace lineage {
namespace {

const FixtureProgram& pickle_fixture() { return *find_fixture("avoid-pickle"); }

Candidate as_candidate(std::string code, std::vector<std::string> applied = {}) {
  Candidate c;
  c.candidate_id = 5;
  c.code = std::move(code);
  c.language_tag = std::string(pysub::kLanguageTag);
  c.transform_meta.applied_strategies = std::move(applied);
  return c;
}

Candidate renamed() {
  Rng rng(3);
  return as_candidate(
      pysub::print(identifier_rename(pysub::parse(pickle_fixture().code), rng).module),
      {"identifier-rename"});
}

class ThrowingChecker : public SemanticChecker {
 public:
  bool equivalent(std::string_view, const Candidate&, std::string&) override {
    throw std::runtime_error("checker crashed");
  }
};

TEST(FixtureTests, RenameIsEquivalent) {
  FixtureTestChecker checker(pickle_fixture().tests);
  std::string log;
  EXPECT_TRUE(semantic_check(pickle_fixture().code, renamed(), checker, log)) << log;
  EXPECT_TRUE(log.empty());
}

TEST(FixtureTests, ChangedBehaviorIsRejected) {
  FixtureTestChecker checker(pickle_fixture().tests);
  std::string code = pickle_fixture().code;
  const auto pos = code.find("pickle.loads(blob)");
  ASSERT_NE(pos, std::string::npos);
  code.replace(pos, std::string("pickle.loads(blob)").size(), "blob");
  std::string log;
  EXPECT_FALSE(semantic_check(pickle_fixture().code, as_candidate(code), checker, log));
  EXPECT_FALSE(log.empty());
}

TEST(FixtureTests, UnparseableIsRejected) {
  FixtureTestChecker checker(pickle_fixture().tests);
  std::string log;
  EXPECT_FALSE(semantic_check(pickle_fixture().code, as_candidate("def (:\n"), checker, log));
  EXPECT_NE(log.find("does not parse"), std::string::npos) << log;
}

TEST(FixtureTests, EveryFixtureAcceptsItself) {
  for (const auto& f : fixture_programs()) {
    FixtureTestChecker checker(f.tests);
    std::string log;
    EXPECT_TRUE(semantic_check(f.code, as_candidate(f.code), checker, log)) << f.label << ": " << log;
  }
}

TEST(DeclaredGuarantee, TrustsBuiltinsOnly) {
  DeclaredGuaranteeChecker checker;
  std::string log;
  EXPECT_TRUE(semantic_check(pickle_fixture().code, renamed(), checker, log));
  EXPECT_FALSE(semantic_check(pickle_fixture().code,
                              as_candidate(pickle_fixture().code, {"attention-disruption"}), checker,
                              log));
  EXPECT_NE(log.find("attention-disruption"), std::string::npos);
  EXPECT_FALSE(semantic_check("", as_candidate("x = (\n", {"identifier-rename"}), checker, log));
}

TEST(ExternalHook, ExitStatusDecides) {
  ExternalCommandChecker same({"cmp", "-s", "{original}", "{candidate}"}, std::chrono::seconds(10));
  std::string log;
  EXPECT_TRUE(semantic_check("x = 1\n", as_candidate("x = 1\n"), same, log)) << log;
  EXPECT_FALSE(semantic_check("x = 1\n", as_candidate("x = 2\n"), same, log));
  EXPECT_NE(log.find("exited 1"), std::string::npos) << log;

  ExternalCommandChecker failing({"sh", "-c", "echo nope >&2; exit 4"}, std::chrono::seconds(10));
  log.clear();
  EXPECT_FALSE(semantic_check("x = 1\n", as_candidate("x = 1\n"), failing, log));
  EXPECT_NE(log.find("nope"), std::string::npos) << log;

  ExternalCommandChecker missing({"no-such-equivalence-tool"}, std::chrono::seconds(10));
  log.clear();
  EXPECT_FALSE(semantic_check("x = 1\n", as_candidate("x = 1\n"), missing, log));
  EXPECT_FALSE(log.empty());

  ExternalCommandChecker slow({"sleep", "5"}, std::chrono::milliseconds(200));
  log.clear();
  EXPECT_FALSE(semantic_check("x = 1\n", as_candidate("x = 1\n"), slow, log));
  EXPECT_NE(log.find("timed out"), std::string::npos) << log;

  EXPECT_THROW(ExternalCommandChecker({}, std::chrono::seconds(1)), ValidationError);
}

TEST(SemanticCheck, CrashingCheckerIsARejection) {
  ThrowingChecker checker;
  std::string log;
  EXPECT_FALSE(semantic_check("x = 1\n", as_candidate("x = 1\n"), checker, log));
  EXPECT_NE(log.find("checker crashed"), std::string::npos) << log;
}

TEST(HookKinds, NamesRoundTrip) {
  for (auto k : {SemanticHookKind::kFixtureTests, SemanticHookKind::kDeclaredGuarantee,
                 SemanticHookKind::kExternal}) {
    EXPECT_EQ(semantic_hook_from_string(to_string(k)), k);
  }
  EXPECT_FALSE(semantic_hook_from_string("vibes"));
  SemanticHookSpec spec;
  spec.kind = SemanticHookKind::kDeclaredGuarantee;
  EXPECT_NE(dynamic_cast<DeclaredGuaranteeChecker*>(make_semantic_checker(spec).get()), nullptr);
}

}  // namespace
}  // namespace lineage
