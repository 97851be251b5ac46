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

#include "lineage/checkpoint.hpp"
#include "lineage/error.hpp"
#include "lineage/orchestrator.hpp"
#include "support.hpp"

namespace lineage {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;
using testing::fixture_config;

CampaignState partial_state(const fs::path& dir, std::uint64_t seed = 11) {
  RunOptions opts;
  opts.checkpoint_dir = dir;
  opts.stop_after_cycles = 1;
  Campaign c(fixture_config("avoid-pickle", 3, seed), opts);
  c.run();
  return c.state();
}

TEST(Checkpoint, RoundTripsFullState) {
  TempDir dir;
  const auto saved = partial_state(dir.path());
  for (const char* f : {kTreeFile, kLibraryFile, kMetaFile, kCandidatesFile, kTranscriptFile, kReportFile}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  EXPECT_EQ(saved.cycles_completed, 1);
  EXPECT_GT(saved.tree.size(), 1u);
  const auto loaded = load_checkpoint(dir.path());
  EXPECT_EQ(loaded, saved);
  EXPECT_EQ(load_report(dir.path()).campaign_id, saved.campaign_id);
}

TEST(Checkpoint, EveryFileCarriesTheCampaignId) {
  TempDir dir;
  const auto saved = partial_state(dir.path());
  for (const char* f : {kTreeFile, kLibraryFile, kMetaFile, kCandidatesFile, kReportFile}) {
    EXPECT_NE(testing::read_file(dir / f).find(saved.campaign_id), std::string::npos) << f;
  }
  EXPECT_EQ(saved.campaign_id, campaign_id_for(saved.config));
}

TEST(Checkpoint, MixedCampaignFilesAreRefused) {
  TempDir a, b;
  const auto sa = partial_state(a.path(), 11);
  const auto sb = partial_state(b.path(), 12);
  ASSERT_NE(sa.campaign_id, sb.campaign_id);
  fs::copy_file(b / kLibraryFile, a / kLibraryFile, fs::copy_options::overwrite_existing);
  fs::copy_file(b / kTreeFile, a / kTreeFile, fs::copy_options::overwrite_existing);
  try {
    load_checkpoint(a.path());
    FAIL();
  } catch (const CheckpointError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find(kLibraryFile), std::string::npos) << msg;
    EXPECT_NE(msg.find(kTreeFile), std::string::npos) << msg;
    EXPECT_NE(msg.find(sb.campaign_id), std::string::npos) << msg;
  }
  fs::copy_file(b / kReportFile, a / kReportFile, fs::copy_options::overwrite_existing);
  EXPECT_THROW(load_report(a.path()), CheckpointError);
}

TEST(Checkpoint, MissingOrCorruptFiles) {
  TempDir dir;
  partial_state(dir.path());
  testing::write_file(dir / kCandidatesFile, "{not json\n");
  EXPECT_THROW(load_checkpoint(dir.path()), CheckpointError);
  fs::remove(dir / kMetaFile);
  EXPECT_THROW(load_checkpoint(dir.path()), CheckpointError);
  TempDir empty;
  EXPECT_THROW(load_checkpoint(empty.path()), CheckpointError);
  EXPECT_THROW(load_report(empty.path()), CheckpointError);
}

TEST(Checkpoint, WriteAtomicReplacesWholeFile) {
  TempDir dir;
  write_atomic(dir / "f.txt", "first version, longer");
  write_atomic(dir / "f.txt", "second");
  EXPECT_EQ(testing::read_file(dir / "f.txt"), "second");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path())) ++entries;
  EXPECT_EQ(entries, 1u);
}

TEST(Checkpoint, RecordsRoundTrip) {
  DetectionRun r;
  r.model_id = "m";
  r.risk_score = 2;
  r.vuln_types = {"xss"};
  r.reasoning_chain = {"Step 1: `x`"};
  r.raw_text = "{\"score\": 2}";
  r.finding_lines = {3, 4};
  r.round_index = 2;
  r.temperature = 0.6;
  r.paraphrased = true;
  EXPECT_EQ(run_from_json(run_to_json(r)), r);

  Candidate c;
  c.candidate_id = 4;
  c.code = "x = 1\n";
  c.origin_node = 2;
  c.transform_meta = {2, {"identifier-rename", "call-table-dispatch"}};
  c.language_tag = "python-subset";
  c.step_begin = 1;
  EXPECT_EQ(candidate_from_json(candidate_to_json(c)), c);

  VerifierOutcome o;
  o.candidate_id = 4;
  o.admitted = true;
  o.phase1.parse_ok = true;
  o.phase1.analyzer_findings["builtin-patterns"] = {};
  o.phase1.adapter_errors["ext"] = "timed out";
  o.phase2_runs = {r, r};
  o.phase3_votes["a"] = {true, r, ""};
  o.phase3_votes["b"] = {false, std::nullopt, "down"};
  o.potential = PotentialScore{};
  o.potential->phi = 1.5;
  o.feedback_digest.flagged_lines = {4};
  o.feedback_digest.flagged_features = {"x"};
  o.error = "";
  EXPECT_EQ(outcome_from_json(outcome_to_json(o)), o);

  CampaignReport rep;
  rep.campaign_id = "abc";
  rep.vuln_label = "avoid-pickle";
  rep.cycles_used = 7;
  rep.score_trajectory = {{0, 2}, {7, 5}};
  rep.initial_score = 2;
  rep.final_score = 5;
  rep.pass = true;
  rep.passing_candidate = 12;
  rep.best_candidate = 12;
  rep.completed = true;
  EXPECT_EQ(report_from_json(report_to_json(rep)), rep);
}

TEST(DirectoryLock, SecondHolderIsRefused) {
  TempDir dir;
  {
    DirectoryLock first(dir.path());
    EXPECT_THROW(DirectoryLock second(dir.path()), CheckpointError);
  }
  EXPECT_NO_THROW(DirectoryLock again(dir.path()));
}

}  // namespace
}  // namespace lineage
