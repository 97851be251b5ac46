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

#include "lineage/checkpoint.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "lineage/error.hpp"
#include "lineage/random.hpp"

namespace lineage {

using nlohmann::json;
namespace fs = std::filesystem;

json report_to_json(const CampaignReport& r) {
  json traj = json::array();
  for (const auto& [cycle, score] : r.score_trajectory) traj.push_back({cycle, score});
  json j = {{"campaign_id", r.campaign_id},
            {"vuln_label", r.vuln_label},
            {"cycles_used", r.cycles_used},
            {"score_trajectory", traj},
            {"initial_score", r.initial_score},
            {"final_score", r.final_score},
            {"pass", r.pass},
            {"passing_candidate", nullptr},
            {"best_candidate", r.best_candidate},
            {"static_pass", r.static_pass},
            {"completed", r.completed},
            {"annotation", r.annotation}};
  if (r.passing_candidate) j["passing_candidate"] = *r.passing_candidate;
  return j;
}

CampaignReport report_from_json(const json& j) {
  CampaignReport r;
  r.campaign_id = j.at("campaign_id").get<std::string>();
  r.vuln_label = j.at("vuln_label").get<std::string>();
  r.cycles_used = j.at("cycles_used").get<int>();
  for (const auto& e : j.at("score_trajectory")) {
    r.score_trajectory.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  }
  r.initial_score = j.at("initial_score").get<int>();
  r.final_score = j.at("final_score").get<int>();
  r.pass = j.at("pass").get<bool>();
  if (!j.at("passing_candidate").is_null()) r.passing_candidate = j["passing_candidate"].get<CandidateId>();
  r.best_candidate = j.value("best_candidate", CandidateId{0});
  r.static_pass = j.at("static_pass").get<bool>();
  r.completed = j.value("completed", true);
  r.annotation = j.value("annotation", std::string());
  return r;
}

json run_to_json(const DetectionRun& r) {
  return {{"model_id", r.model_id},
          {"risk_score", r.risk_score},
          {"vuln_types", r.vuln_types},
          {"reasoning_chain", r.reasoning_chain},
          {"raw_text", r.raw_text},
          {"finding_lines", r.finding_lines},
          {"round_index", r.round_index},
          {"temperature", r.temperature},
          {"paraphrased", r.paraphrased}};
}

DetectionRun run_from_json(const json& j) {
  DetectionRun r;
  r.model_id = j.at("model_id").get<std::string>();
  r.risk_score = j.at("risk_score").get<int>();
  r.vuln_types = j.at("vuln_types").get<std::vector<std::string>>();
  r.reasoning_chain = j.at("reasoning_chain").get<std::vector<std::string>>();
  r.raw_text = j.at("raw_text").get<std::string>();
  r.finding_lines = j.at("finding_lines").get<std::vector<int>>();
  r.round_index = j.at("round_index").get<int>();
  r.temperature = j.at("temperature").get<double>();
  r.paraphrased = j.at("paraphrased").get<bool>();
  return r;
}

json candidate_to_json(const Candidate& c) {
  return {{"candidate_id", c.candidate_id},
          {"code", c.code},
          {"origin_node", c.origin_node},
          {"indirection_depth", c.transform_meta.indirection_depth},
          {"applied_strategies", c.transform_meta.applied_strategies},
          {"language_tag", c.language_tag},
          {"step_begin", c.step_begin}};
}

Candidate candidate_from_json(const json& j) {
  Candidate c;
  c.candidate_id = j.at("candidate_id").get<CandidateId>();
  c.code = j.at("code").get<std::string>();
  c.origin_node = j.at("origin_node").get<NodeId>();
  c.transform_meta.indirection_depth = j.at("indirection_depth").get<int>();
  c.transform_meta.applied_strategies = j.at("applied_strategies").get<std::vector<std::string>>();
  c.language_tag = j.at("language_tag").get<std::string>();
  c.step_begin = j.at("step_begin").get<std::size_t>();
  return c;
}

namespace {

json components_to_json(const ComponentScores& c) {
  return {{"s_eva", c.s_eva}, {"s_hal", c.s_hal}, {"s_con", c.s_con}, {"s_tr", c.s_tr}};
}

ComponentScores components_from_json(const json& j) {
  return {j.at("s_eva").get<double>(), j.at("s_hal").get<double>(), j.at("s_con").get<double>(),
          j.at("s_tr").get<double>()};
}

}  // namespace

json outcome_to_json(const VerifierOutcome& o) {
  json findings = json::object();
  for (const auto& [id, list] : o.phase1.analyzer_findings) {
    json arr = json::array();
    for (const auto& f : list) {
      arr.push_back({{"analyzer_id", f.analyzer_id},
                     {"rule_id", f.rule_id},
                     {"line", f.line ? json(*f.line) : json()},
                     {"severity", std::string(to_string(f.severity))}});
    }
    findings[id] = arr;
  }
  json runs = json::array();
  for (const auto& r : o.phase2_runs) runs.push_back(run_to_json(r));
  json votes = json::object();
  for (const auto& [id, v] : o.phase3_votes) {
    votes[id] = {{"pass", v.pass}, {"run", v.run ? run_to_json(*v.run) : json()}, {"error", v.error}};
  }
  json potential;
  if (o.potential) {
    json per_model = json::object();
    for (const auto& [id, c] : o.potential->per_model) per_model[id] = components_to_json(c);
    potential = {{"s_eva", o.potential->s_eva}, {"s_hal", o.potential->s_hal},
                 {"s_con", o.potential->s_con}, {"s_tr", o.potential->s_tr},
                 {"phi", o.potential->phi},     {"per_model", per_model}};
  }
  return {{"candidate_id", o.candidate_id},
          {"admitted", o.admitted},
          {"semantic_ok", o.semantic_ok},
          {"parse_ok", o.phase1.parse_ok},
          {"analyzer_findings", findings},
          {"adapter_errors", o.phase1.adapter_errors},
          {"phase2_runs", runs},
          {"phase3_votes", votes},
          {"pass", o.pass},
          {"potential", potential},
          {"digest",
           {{"flagged_lines", o.feedback_digest.flagged_lines},
            {"flagged_features", o.feedback_digest.flagged_features},
            {"reasoning_excerpts", o.feedback_digest.reasoning_excerpts}}},
          {"error", o.error}};
}

VerifierOutcome outcome_from_json(const json& j) {
  VerifierOutcome o;
  o.candidate_id = j.at("candidate_id").get<CandidateId>();
  o.admitted = j.at("admitted").get<bool>();
  o.semantic_ok = j.at("semantic_ok").get<bool>();
  o.phase1.parse_ok = j.at("parse_ok").get<bool>();
  for (const auto& [id, arr] : j.at("analyzer_findings").items()) {
    auto& list = o.phase1.analyzer_findings[id];
    for (const auto& f : arr) {
      StaticFinding s;
      s.analyzer_id = f.at("analyzer_id").get<std::string>();
      s.rule_id = f.at("rule_id").get<std::string>();
      if (!f.at("line").is_null()) s.line = f["line"].get<int>();
      s.severity = severity_from_string(f.at("severity").get<std::string>()).value_or(Severity::kMedium);
      list.push_back(std::move(s));
    }
  }
  o.phase1.adapter_errors = j.at("adapter_errors").get<std::map<std::string, std::string>>();
  for (const auto& r : j.at("phase2_runs")) o.phase2_runs.push_back(run_from_json(r));
  for (const auto& [id, v] : j.at("phase3_votes").items()) {
    Phase3Vote vote;
    vote.pass = v.at("pass").get<bool>();
    if (!v.at("run").is_null()) vote.run = run_from_json(v["run"]);
    vote.error = v.at("error").get<std::string>();
    o.phase3_votes.emplace(id, std::move(vote));
  }
  o.pass = j.at("pass").get<bool>();
  if (const auto& p = j.at("potential"); !p.is_null()) {
    PotentialScore s;
    s.s_eva = p.at("s_eva").get<double>();
    s.s_hal = p.at("s_hal").get<double>();
    s.s_con = p.at("s_con").get<double>();
    s.s_tr = p.at("s_tr").get<double>();
    s.phi = p.at("phi").get<double>();
    for (const auto& [id, c] : p.at("per_model").items()) s.per_model.emplace(id, components_from_json(c));
    o.potential = std::move(s);
  }
  const auto& d = j.at("digest");
  o.feedback_digest.flagged_lines = d.at("flagged_lines").get<std::vector<int>>();
  o.feedback_digest.flagged_features = d.at("flagged_features").get<std::vector<std::string>>();
  o.feedback_digest.reasoning_excerpts = d.at("reasoning_excerpts").get<std::vector<std::string>>();
  o.error = j.at("error").get<std::string>();
  return o;
}

std::string campaign_id_for(const CampaignConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(hash_string(config_to_json(config).dump())));
  return buf;
}

void write_atomic(const fs::path& path, const std::string& contents) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw CheckpointError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw CheckpointError("cannot rename " + tmp.string() + ": " + ec.message());
}

namespace {

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw CheckpointError("missing checkpoint file " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text, const fs::path& p) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw CheckpointError(p.string() + ": " + e.what());
  }
}

// Splits off a JSON header line and returns the rest.
std::pair<json, std::string> split_header(const std::string& text, const fs::path& p) {
  const auto nl = text.find('\n');
  return {parse_json(text.substr(0, nl), p), nl == std::string::npos ? std::string() : text.substr(nl + 1)};
}

json header(const std::string& campaign_id) { return {{"campaign_id", campaign_id}}; }

json lineages_to_json(const std::vector<std::vector<std::string>>& l) { return l; }

}  // namespace

void save_checkpoint(const fs::path& dir, const CampaignState& s, const CampaignReport& report) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw CheckpointError("cannot create " + dir.string() + ": " + ec.message());

  std::string candidates = header(s.campaign_id).dump() + "\n";
  for (const auto& [id, c] : s.candidates) {
    json line = {{"candidate", candidate_to_json(c)}, {"outcome", nullptr}};
    if (auto it = s.outcomes.find(id); it != s.outcomes.end()) line["outcome"] = outcome_to_json(it->second);
    candidates += line.dump() + "\n";
  }
  std::string transcript;
  for (const auto& l : s.transcript) transcript += l + "\n";
  json traj = json::array();
  for (const auto& [cycle, score] : s.trajectory) traj.push_back({cycle, score});
  const json meta = {{"campaign_id", s.campaign_id},
                     {"config", config_to_json(s.config)},
                     {"baseline_done", s.baseline_done},
                     {"cycles_completed", s.cycles_completed},
                     {"next_candidate_id", s.next_candidate_id},
                     {"initial_score", s.initial_score},
                     {"trajectory", traj},
                     {"failed_lineages", lineages_to_json(s.failed_lineages)},
                     {"finished", s.finished},
                     {"annotation", s.annotation}};
  json report_doc = report_to_json(report);

  write_atomic(dir / kCandidatesFile, candidates);
  write_atomic(dir / kTreeFile, header(s.campaign_id).dump() + "\n" + s.tree.to_jsonl());
  write_atomic(dir / kLibraryFile,
               json{{"campaign_id", s.campaign_id}, {"strategies", s.library.to_json()}}.dump(2) + "\n");
  write_atomic(dir / kTranscriptFile, transcript);
  write_atomic(dir / kReportFile, report_doc.dump(2) + "\n");
  // The meta file goes last: a crash mid-save leaves the previous meta in
  // place, and the id check below catches a half-written campaign switch.
  write_atomic(dir / kMetaFile, meta.dump(2) + "\n");
}

CampaignState load_checkpoint(const fs::path& dir) {
  CampaignState s;
  const json meta = parse_json(read_text(dir / kMetaFile), dir / kMetaFile);
  try {
    s.campaign_id = meta.at("campaign_id").get<std::string>();
    auto parsed = parse_config(meta.at("config"));
    if (!parsed.config) {
      std::string msg = "campaign.meta holds an invalid config";
      for (const auto& v : parsed.violations) msg += "; " + v.str();
      throw CheckpointError(msg);
    }
    s.config = *parsed.config;
    s.baseline_done = meta.at("baseline_done").get<bool>();
    s.cycles_completed = meta.at("cycles_completed").get<int>();
    s.next_candidate_id = meta.at("next_candidate_id").get<CandidateId>();
    s.initial_score = meta.at("initial_score").get<int>();
    for (const auto& e : meta.at("trajectory")) s.trajectory.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    s.failed_lineages = meta.at("failed_lineages").get<std::vector<std::vector<std::string>>>();
    s.finished = meta.at("finished").get<bool>();
    s.annotation = meta.at("annotation").get<std::string>();
  } catch (const json::exception& e) {
    throw CheckpointError("campaign.meta: " + std::string(e.what()));
  }

  std::vector<std::string> mismatches;
  if (campaign_id_for(s.config) != s.campaign_id) {
    mismatches.push_back("campaign.meta: config digest " + campaign_id_for(s.config) + " != " + s.campaign_id);
  }
  auto check_id = [&](const json& j, const char* file) {
    const auto id = j.value("campaign_id", std::string("<none>"));
    if (id != s.campaign_id) mismatches.push_back(std::string(file) + ": " + id + " != " + s.campaign_id);
  };

  const auto [tree_head, tree_body] = split_header(read_text(dir / kTreeFile), dir / kTreeFile);
  check_id(tree_head, kTreeFile);
  const json lib = parse_json(read_text(dir / kLibraryFile), dir / kLibraryFile);
  check_id(lib, kLibraryFile);
  const auto [cand_head, cand_body] = split_header(read_text(dir / kCandidatesFile), dir / kCandidatesFile);
  check_id(cand_head, kCandidatesFile);
  const json report = parse_json(read_text(dir / kReportFile), dir / kReportFile);
  check_id(report, kReportFile);
  if (!mismatches.empty()) {
    std::string msg = "inconsistent checkpoint in " + dir.string() + ":";
    for (const auto& m : mismatches) msg += "\n  " + m;
    throw CheckpointError(msg);
  }

  try {
    s.tree = StrategyTree::from_jsonl(tree_body, s.config.rng_seed);
    s.library = StrategyLibrary::from_json(lib.at("strategies"));
    std::istringstream lines(cand_body);
    for (std::string line; std::getline(lines, line);) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      auto c = candidate_from_json(j.at("candidate"));
      if (!j.at("outcome").is_null()) s.outcomes.emplace(c.candidate_id, outcome_from_json(j["outcome"]));
      s.candidates.emplace(c.candidate_id, std::move(c));
    }
  } catch (const json::exception& e) {
    throw CheckpointError("malformed checkpoint in " + dir.string() + ": " + e.what());
  } catch (const StructuralError& e) {
    throw CheckpointError("malformed tree in " + dir.string() + ": " + e.what());
  }
  for (const auto& [id, node] : s.tree.nodes()) {
    if (s.candidates.count(node.candidate_id) == 0) {
      throw CheckpointError("inconsistent checkpoint in " + dir.string() + ":\n  tree node " +
                            std::to_string(id) + " references missing candidate " +
                            std::to_string(node.candidate_id));
    }
  }

  std::ifstream transcript(dir / kTranscriptFile);
  for (std::string line; std::getline(transcript, line);) s.transcript.push_back(line);
  return s;
}

CampaignReport load_report(const fs::path& dir) {
  const json meta = parse_json(read_text(dir / kMetaFile), dir / kMetaFile);
  const json doc = parse_json(read_text(dir / kReportFile), dir / kReportFile);
  try {
    auto r = report_from_json(doc);
    const auto id = meta.at("campaign_id").get<std::string>();
    if (r.campaign_id != id) {
      throw CheckpointError("inconsistent checkpoint in " + dir.string() + ":\n  report.json: " +
                            r.campaign_id + " != " + id);
    }
    return r;
  } catch (const json::exception& e) {
    throw CheckpointError(dir.string() + "/report.json: " + e.what());
  }
}

DirectoryLock::DirectoryLock(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  const auto path = (dir / kLockFile).string();
  fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw CheckpointError("cannot open lock file " + path);
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw CheckpointError(dir.string() + " is in use by another invocation");
  }
}

DirectoryLock::~DirectoryLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

}  // namespace lineage
