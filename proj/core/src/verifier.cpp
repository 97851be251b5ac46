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

#include "lineage/verifier.hpp"

#include <algorithm>
#include <future>
#include <set>

#include "lineage/error.hpp"
#include "lineage/pysub.hpp"

namespace lineage {

namespace {

template <typename T, typename F>
std::vector<T> run_all(std::size_t n, bool parallel, F&& f) {
  std::vector<T> out;
  out.reserve(n);
  if (!parallel || n < 2) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(f(i));
    return out;
  }
  std::vector<std::future<T>> futures;
  futures.reserve(n);
  for (std::size_t i = 0; i < n; ++i) futures.push_back(std::async(std::launch::async, f, i));
  for (auto& fu : futures) out.push_back(fu.get());
  return out;
}

struct RoundResult {
  std::optional<DetectionRun> run;
  std::string error;
  bool transport = false;
};

}  // namespace

Verifier::Verifier(Detector& primary, std::vector<Detector*> ensemble, AdapterRegistry& adapters,
                   VerifierConfig config)
    : primary_(primary), ensemble_(std::move(ensemble)), adapters_(adapters), config_(config) {
  if (config_.k_rounds < 3 || config_.k_rounds % 2 == 0) {
    throw ValidationError("k_rounds must be odd and at least 3, got " +
                          std::to_string(config_.k_rounds));
  }
  for (const auto* d : ensemble_) {
    if (d == &primary_ || d->id() == primary_.id()) {
      throw ValidationError("the primary detector cannot also vote in the ensemble");
    }
  }
}

Phase1Record Verifier::phase1_static(const Candidate& candidate, bool& admitted) {
  Phase1Record rec;
  if (candidate.language_tag == pysub::kLanguageTag) {
    rec.parse_ok = pysub::parses(candidate.code);
  } else {
    rec.parse_ok = !candidate.code.empty();
  }
  admitted = rec.parse_ok;
  if (!rec.parse_ok) return rec;
  for (const auto& id : adapters_.ids()) {
    try {
      auto findings = adapters_.analyze_static(id, candidate.code);
      if (!findings.empty()) admitted = false;
      rec.analyzer_findings[id] = std::move(findings);
    } catch (const AdapterError& e) {
      rec.adapter_errors[id] = e.what();
      admitted = false;
    }
  }
  return rec;
}

std::vector<DetectionRun> Verifier::phase2_multiround(const Candidate& candidate) {
  const auto k = static_cast<std::size_t>(config_.k_rounds);
  auto results = run_all<RoundResult>(k, config_.parallel, [&](std::size_t r) {
    DetectionContext ctx;
    ctx.candidate_id = candidate.candidate_id;
    ctx.round_index = static_cast<int>(r);
    ctx.indirection_depth = candidate.transform_meta.indirection_depth;
    ctx.temperature = config_.base_temperature + config_.temperature_step * static_cast<double>(r);
    ctx.paraphrase = r % 2 == 1;
    RoundResult out;
    try {
      out.run = primary_.detect(candidate.code, ctx);
    } catch (const TransportError& e) {
      out.error = e.what();
      out.transport = true;
    } catch (const Error& e) {
      out.error = e.what();
    }
    return out;
  });
  std::vector<DetectionRun> runs;
  std::size_t failed = 0, transport_failed = 0;
  std::string last_error;
  for (auto& r : results) {
    if (r.run) {
      runs.push_back(std::move(*r.run));
    } else {
      ++failed;
      transport_failed += r.transport ? 1 : 0;
      last_error = r.error;
    }
  }
  if (2 * failed > k) {
    if (transport_failed == failed) {
      throw TransportError("primary detector unavailable: " + last_error);
    }
    throw PhaseError(std::to_string(failed) + " of " + std::to_string(k) +
                     " rounds failed; last error: " + last_error);
  }
  std::sort(runs.begin(), runs.end(), [](const auto& a, const auto& b) {
    return std::tie(a.model_id, a.round_index) < std::tie(b.model_id, b.round_index);
  });
  return runs;
}

std::map<std::string, Phase3Vote> Verifier::phase3_moe_vote(const Candidate& candidate) {
  auto votes = run_all<Phase3Vote>(ensemble_.size(), config_.parallel, [&](std::size_t i) {
    DetectionContext ctx;
    ctx.candidate_id = candidate.candidate_id;
    ctx.round_index = 0;
    ctx.indirection_depth = candidate.transform_meta.indirection_depth;
    ctx.temperature = config_.base_temperature;
    Phase3Vote v;
    try {
      v.run = ensemble_[i]->detect(candidate.code, ctx);
      v.pass = v.run->risk_score == kMaxRiskScore;
    } catch (const Error& e) {
      v.error = e.what();
    }
    return v;
  });
  std::map<std::string, Phase3Vote> out;
  for (std::size_t i = 0; i < ensemble_.size(); ++i) out[ensemble_[i]->id()] = std::move(votes[i]);
  return out;
}

bool Verifier::aggregate_vote(const std::map<std::string, Phase3Vote>& votes) {
  std::size_t passes = 0;
  for (const auto& [id, v] : votes) passes += v.pass ? 1 : 0;
  return 2 * passes > votes.size();
}

VerifierOutcome Verifier::verify(const Candidate& candidate) {
  VerifierOutcome out;
  out.candidate_id = candidate.candidate_id;
  out.phase1 = phase1_static(candidate, out.admitted);
  if (!out.admitted) {
    out.feedback_digest = extract_digest(out);
    return out;
  }
  try {
    out.phase2_runs = phase2_multiround(candidate);
  } catch (const PhaseError& e) {
    out.admitted = false;
    out.error = e.what();
    return out;
  }
  out.phase3_votes = phase3_moe_vote(candidate);
  out.pass = pass_verdict(out.phase2_runs) && aggregate_vote(out.phase3_votes);
  out.potential = outcome_potential(out, primary_.id());
  out.feedback_digest = extract_digest(out);
  return out;
}

PotentialScore outcome_potential(const VerifierOutcome& outcome, const std::string& primary_id) {
  std::map<std::string, std::vector<DetectionRun>> per_model;
  per_model[primary_id] = outcome.phase2_runs;
  std::size_t passes = 0;
  for (const auto& [id, v] : outcome.phase3_votes) {
    passes += v.pass ? 1 : 0;
    if (v.run) per_model[id].push_back(*v.run);
  }
  const double s_tr = outcome.phase3_votes.empty()
                          ? 0.0
                          : static_cast<double>(passes) / static_cast<double>(outcome.phase3_votes.size());
  return potential_with_transfer(per_model, s_tr);
}

ReflectionDigest extract_digest(const VerifierOutcome& outcome) {
  ReflectionDigest d;
  std::set<int> lines;
  auto add_feature = [&](const std::string& f) {
    if (std::find(d.flagged_features.begin(), d.flagged_features.end(), f) == d.flagged_features.end()) {
      d.flagged_features.push_back(f);
    }
  };
  auto add_excerpt = [&](const std::string& s) {
    if (std::find(d.reasoning_excerpts.begin(), d.reasoning_excerpts.end(), s) ==
        d.reasoning_excerpts.end()) {
      d.reasoning_excerpts.push_back(s);
    }
  };
  for (const auto& [adapter, findings] : outcome.phase1.analyzer_findings) {
    for (const auto& f : findings) {
      if (f.line) lines.insert(*f.line);
      const auto slash = f.rule_id.find('/');
      const std::string tail = slash == std::string::npos ? f.rule_id : f.rule_id.substr(slash + 1);
      if (f.rule_id.rfind("dangerous-literal/", 0) == 0) {
        add_feature("\"" + tail + "\"");
      } else if (tail.find('.') != std::string::npos || slash != std::string::npos) {
        add_feature(tail.find('.') != std::string::npos ? tail : tail + "(");
      }
      add_excerpt(adapter + " flagged " + f.rule_id +
                  (f.line ? " at line " + std::to_string(*f.line) : std::string()));
    }
  }
  auto take = [&](const DetectionRun& run) {
    if (run.risk_score == kMaxRiskScore) return;
    for (int l : run.finding_lines) lines.insert(l);
    for (const auto& step : run.reasoning_chain) {
      add_excerpt(step);
      for (auto& t : cited_tokens(step)) add_feature(t);
    }
  };
  for (const auto& r : outcome.phase2_runs) take(r);
  for (const auto& [id, v] : outcome.phase3_votes) {
    if (v.run) take(*v.run);
  }
  d.flagged_lines.assign(lines.begin(), lines.end());
  return d;
}

std::string describe_outcome(const VerifierOutcome& o) {
  std::string out;
  out += "parse_ok: " + std::string(o.phase1.parse_ok ? "true" : "false") + "\n";
  out += "semantic_ok: " + std::string(o.semantic_ok ? "true" : "false") + "\n";
  out += "admitted: " + std::string(o.admitted ? "true" : "false") + "\n";
  for (const auto& [id, findings] : o.phase1.analyzer_findings) {
    out += "static " + id + ": " + std::to_string(findings.size()) + " finding(s)\n";
  }
  for (const auto& [id, err] : o.phase1.adapter_errors) out += "static " + id + " failed: " + err + "\n";
  if (!o.phase2_runs.empty()) {
    out += "primary scores:";
    for (const auto& r : o.phase2_runs) out += " " + std::to_string(r.risk_score);
    out += "\n";
  }
  for (const auto& [id, v] : o.phase3_votes) {
    out += "ensemble " + id + ": " +
           (v.run ? "score " + std::to_string(v.run->risk_score) : "abstained (" + v.error + ")") + "\n";
  }
  if (!o.error.empty()) out += "error: " + o.error + "\n";
  out += describe(o.feedback_digest);
  return out;
}

}  // namespace lineage
