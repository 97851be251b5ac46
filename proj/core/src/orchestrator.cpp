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

#include "lineage/orchestrator.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <mutex>
#include <set>
#include <sstream>

#include "lineage/error.hpp"
#include "lineage/pysub.hpp"
#include "lineage/random.hpp"
#include "lineage/transforms.hpp"

namespace lineage {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Forwards to a detector and counts calls per candidate.
class CountingDetector : public Detector {
 public:
  CountingDetector(std::unique_ptr<Detector> inner, std::map<CandidateId, std::uint64_t>& counts,
                   std::mutex& mu)
      : Detector(inner->id()), inner_(std::move(inner)), counts_(counts), mu_(mu) {}

 protected:
  DetectionRun run(std::string_view code, const DetectionContext& ctx) override {
    {
      std::lock_guard lock(mu_);
      ++counts_[ctx.candidate_id];
    }
    return inner_->detect(code, ctx);
  }

 private:
  std::unique_ptr<Detector> inner_;
  std::map<CandidateId, std::uint64_t>& counts_;
  std::mutex& mu_;
};

std::mutex& counts_mutex() {
  static std::mutex mu;
  return mu;
}

std::string join_ids(const std::vector<std::string>& ids) {
  std::string out;
  for (const auto& id : ids) out += (out.empty() ? "" : ", ") + id;
  return out.empty() ? "-" : out;
}

std::string verdict_names(const std::vector<StrategyVerdict>& v) {
  std::vector<std::string> names;
  for (const auto& e : v) names.push_back(e.strategy_name);
  return join_ids(names);
}

std::optional<int> majority_of(const VerifierOutcome& o) {
  if (o.phase2_runs.empty()) return std::nullopt;
  return majority_score(o.phase2_runs);
}

bool static_clean(const VerifierOutcome& o) {
  if (!o.phase1.parse_ok || !o.phase1.adapter_errors.empty()) return false;
  for (const auto& [id, list] : o.phase1.analyzer_findings) {
    if (!list.empty()) return false;
  }
  return true;
}

std::string format_phi(double phi) {
  std::ostringstream ss;
  ss.precision(4);
  ss << std::fixed << phi;
  return ss.str();
}

}  // namespace

Campaign::Campaign(CampaignConfig config, RunOptions options) : options_(std::move(options)) {
  if (config.language_tag == pysub::kLanguageTag) {
    std::string err;
    if (!pysub::parses(config.original_code, &err)) {
      throw ConfigError("original_code: does not parse: " + err);
    }
  }
  state_.campaign_id = campaign_id_for(config);
  state_.tree = StrategyTree(config.rng_seed);
  if (config.library_path.empty()) {
    state_.library = StrategyLibrary::seed();
  } else {
    std::ifstream in(config.library_path);
    if (!in) throw ConfigError("library_path: cannot read " + config.library_path);
    try {
      state_.library = StrategyLibrary::from_json(json::parse(in));
    } catch (const std::exception& e) {
      throw ConfigError("library_path: " + std::string(e.what()));
    }
  }
  state_.config = std::move(config);
  build_components();
}

Campaign::Campaign(CampaignState state, RunOptions options)
    : state_(std::move(state)), options_(std::move(options)) {
  build_components();
}

Campaign::~Campaign() = default;

void Campaign::build_components() {
  const auto& c = state_.config;
  auto wrap = [&](const DetectorSpec& spec) -> std::unique_ptr<Detector> {
    return std::make_unique<CountingDetector>(make_detector(spec, options_.transport), calls_by_candidate_,
                                              counts_mutex());
  };
  primary_ = wrap(c.primary);
  std::vector<Detector*> ensemble;
  for (const auto& spec : c.ensemble) {
    ensemble_.push_back(wrap(spec));
    ensemble.push_back(ensemble_.back().get());
  }
  for (const auto& a : c.adapters) {
    if (a.builtin) {
      adapters_.add(std::make_unique<BuiltinPatternAdapter>());
    } else {
      adapters_.add(std::make_unique<ExternalAdapter>(a.external));
    }
  }
  VerifierConfig vc;
  vc.k_rounds = c.k_rounds;
  vc.base_temperature = c.primary.temperature;
  vc.parallel = c.parallel;
  verifier_ = std::make_unique<Verifier>(*primary_, ensemble, adapters_, vc);

  if (c.generator.remote) {
    auto transport = options_.transport;
    if (!transport) {
      HttpChatOptions opts;
      opts.endpoint = c.generator.endpoint;
      opts.api_key_env = c.generator.api_key_env;
      opts.timeout = c.generator.timeout;
      opts.max_retries = c.generator.max_retries;
      transport = std::make_shared<HttpChatTransport>(opts);
    }
    generator_ = std::make_unique<RemoteGenerator>(
        transport, RemoteGeneratorOptions{c.generator.model_name, c.generator.temperature, c.language_tag});
    reflector_ = std::make_unique<RemoteReflector>(
        transport, RemoteReflectorOptions{c.generator.model_name, c.generator.temperature});
  } else {
    generator_ = std::make_unique<SimulatedGenerator>();
    reflector_ = std::make_unique<SimulatedReflector>();
  }
  checker_ = make_semantic_checker(c.semantic_hook);
}

void Campaign::log(std::string line) {
  if (options_.on_log) options_.on_log(line);
  state_.transcript.push_back(std::move(line));
}

void Campaign::checkpoint() {
  if (options_.checkpoint_dir) save_checkpoint(*options_.checkpoint_dir, state_, report());
}

std::uint64_t Campaign::detector_calls() const {
  std::lock_guard lock(counts_mutex());
  std::uint64_t total = 0;
  for (const auto& [id, n] : calls_by_candidate_) total += n;
  return total;
}

std::uint64_t Campaign::detector_calls_for(CandidateId id) const {
  std::lock_guard lock(counts_mutex());
  auto it = calls_by_candidate_.find(id);
  return it == calls_by_candidate_.end() ? 0 : it->second;
}

bool Campaign::expandable() const {
  if (state_.config.generator.remote) return state_.library.usable_count() > 0;
  // The simulated planner is cheap and deterministic, so ask it directly
  // whether any active node can still be expanded.
  for (auto id : state_.tree.active_nodes()) {
    const auto cid = state_.tree.node(id).candidate_id;
    try {
      plan(state_.candidates.at(cid).code, state_.outcomes.at(cid).feedback_digest, state_.library,
           *generator_, state_.failed_lineages);
      return true;
    } catch (const GenerationError&) {
    }
  }
  return false;
}

VerifierOutcome Campaign::evaluate(const Candidate& candidate) { return verifier_->verify(candidate); }

void Campaign::baseline() {
  if (state_.baseline_done) return;
  const auto& c = state_.config;
  Candidate original;
  original.candidate_id = 0;
  original.code = c.original_code;
  original.language_tag = c.language_tag;
  if (!state_.tree.root_id()) state_.tree.add_root(0);
  original.origin_node = *state_.tree.root_id();
  state_.candidates[0] = original;

  log("campaign " + state_.campaign_id + " (" + c.vuln_label + "), mode " + std::string(to_string(c.mode)));
  VerifierOutcome o;
  try {
    o = evaluate(original);
    if (!o.admitted && o.phase2_runs.empty()) {
      // Static analysis stopped the original; the detector's view of it is
      // still needed for the starting score and the first plan.
      try {
        o.phase2_runs = verifier_->phase2_multiround(original);
        o.feedback_digest = extract_digest(o);
      } catch (const PhaseError& e) {
        log("baseline probe failed: " + std::string(e.what()));
      }
    }
  } catch (const TransportError& e) {
    log("backend outage during baseline: " + std::string(e.what()));
    checkpoint();
    throw;
  }
  state_.outcomes[0] = o;
  state_.initial_score = majority_of(o).value_or(kMinRiskScore);
  const NodeId root = *state_.tree.root_id();
  if (o.admitted && o.potential) state_.tree.record_observation(root, o.potential->phi);
  state_.trajectory = {{0, state_.initial_score}};
  state_.baseline_done = true;
  std::string line = "baseline: score " + std::to_string(state_.initial_score) +
                     (o.admitted ? ", admitted" : ", not admitted") + (o.pass ? ", pass" : "");
  if (!o.error.empty()) line += ", error: " + o.error;
  log(line);
  if (o.pass) {
    state_.tree.set_status(root, NodeStatus::kPassed);
    state_.finished = true;
    state_.annotation = "original already passes";
  }
  checkpoint();
}

bool Campaign::step() {
  if (!state_.baseline_done) baseline();
  if (state_.finished) return false;
  const auto& c = state_.config;
  if (state_.cycles_completed >= c.budget_cycles) {
    state_.finished = true;
    state_.annotation = "budget exhausted";
    checkpoint();
    return false;
  }
  if (state_.tree.active_nodes().empty()) {
    state_.finished = true;
    state_.annotation = "exhausted: no active node left";
    log(state_.annotation);
    checkpoint();
    return false;
  }
  if (!expandable()) {
    state_.finished = true;
    state_.annotation = "exhausted: no active node can be expanded with the remaining strategies";
    log(state_.annotation);
    checkpoint();
    return false;
  }
  const int cycle = state_.cycles_completed + 1;
  Rng rng(derive_seed(c.rng_seed, {static_cast<std::uint64_t>(cycle), 1}));
  NodeId node_id = 0;
  try {
    node_id = state_.tree.sample_node(rng);
  } catch (const ExhaustedError&) {
    state_.finished = true;
    state_.annotation = "exhausted: no active node left";
    log(state_.annotation);
    checkpoint();
    return false;
  }
  const StrategyNode& node = state_.tree.node(node_id);
  const Candidate parent = state_.candidates.at(node.candidate_id);
  log("cycle " + std::to_string(cycle) + ": node " + std::to_string(node_id) + " (candidate " +
      std::to_string(parent.candidate_id) + ", depth " + std::to_string(state_.tree.depth(node_id)) + ")");

  auto finish_cycle = [&](int best) {
    state_.trajectory.emplace_back(cycle, best);
    state_.cycles_completed = cycle;
    if (!state_.finished && state_.cycles_completed >= c.budget_cycles) {
      state_.finished = true;
      state_.annotation = "budget exhausted";
    }
    ++cycles_this_run_;
    checkpoint();
  };
  auto flag_node = [&]() {
    if (state_.tree.prune_and_flag(node_id, c.threshold_n)) {
      const auto& lineage = parent.transform_meta.applied_strategies;
      if (!lineage.empty()) state_.failed_lineages.push_back(lineage);
      log("  node " + std::to_string(node_id) + " failed; lineage " + join_ids(lineage));
    }
  };
  const int best_before = state_.trajectory.empty() ? state_.initial_score : state_.trajectory.back().second;

  std::vector<Candidate> kids;
  try {
    const auto& digest = state_.outcomes.at(parent.candidate_id).feedback_digest;
    ObfuscationPlan p;
    try {
      p = plan(parent.code, digest, state_.library, *generator_, state_.failed_lineages);
    } catch (const GenerationError& e) {
      if (!c.generator.remote) {
        // The simulated library only loses strategies, so this node stays
        // unexpandable.
        log("  planning failed: " + std::string(e.what()) + "; node pruned");
        state_.tree.set_status(node_id, NodeStatus::kPruned);
        finish_cycle(best_before);
        return true;
      }
      throw;
    }
    log("  plan: " + join_ids(p.ordered_strategies()));
    kids = synthesize(parent, node_id, p, c.width_k, *generator_,
                      derive_seed(c.rng_seed, {static_cast<std::uint64_t>(cycle), 2}),
                      state_.next_candidate_id);
  } catch (const GenerationError& e) {
    log("  generation failed: " + std::string(e.what()));
    flag_node();
    finish_cycle(best_before);
    return true;
  } catch (const TransportError& e) {
    log("backend outage during cycle " + std::to_string(cycle) + ": " + e.what());
    checkpoint();
    throw;
  }

  // Semantic filter, in candidate order, before any detector sees the code.
  std::vector<VerifierOutcome> outcomes(kids.size());
  std::vector<std::size_t> survivors;
  for (std::size_t i = 0; i < kids.size(); ++i) {
    std::string why;
    if (semantic_check(c.original_code, kids[i], *checker_, why)) {
      survivors.push_back(i);
      continue;
    }
    log("  " + why);
    auto& o = outcomes[i];
    o.candidate_id = kids[i].candidate_id;
    o.semantic_ok = false;
    o.phase1.parse_ok = kids[i].language_tag != pysub::kLanguageTag || pysub::parses(kids[i].code);
  }
  try {
    if (c.parallel && survivors.size() > 1) {
      std::vector<std::future<VerifierOutcome>> futures;
      for (auto i : survivors) {
        futures.push_back(std::async(std::launch::async, [this, &kids, i] { return evaluate(kids[i]); }));
      }
      std::exception_ptr failure;
      for (std::size_t j = 0; j < futures.size(); ++j) {
        try {
          outcomes[survivors[j]] = futures[j].get();
        } catch (...) {
          if (!failure) failure = std::current_exception();
        }
      }
      if (failure) std::rethrow_exception(failure);
    } else {
      for (auto i : survivors) outcomes[i] = evaluate(kids[i]);
    }
  } catch (const TransportError& e) {
    log("backend outage during cycle " + std::to_string(cycle) + ": " + e.what());
    checkpoint();
    throw;
  }

  // Merge in ascending candidate order.
  int best = best_before;
  std::optional<std::size_t> passed;
  for (std::size_t i = 0; i < kids.size(); ++i) {
    const auto& kid = kids[i];
    const auto& o = outcomes[i];
    state_.candidates[kid.candidate_id] = kid;
    state_.outcomes[kid.candidate_id] = o;
    state_.next_candidate_id = kid.candidate_id + 1;
    const NodeId child = state_.tree.add_node(node_id, own_steps(kid), kid.candidate_id);
    std::string line = "  candidate " + std::to_string(kid.candidate_id) + " [" +
                       join_ids(kid.transform_meta.applied_strategies) + "] depth " +
                       std::to_string(kid.transform_meta.indirection_depth) + ": ";
    if (o.admitted && o.potential) {
      state_.tree.record_observation(child, o.potential->phi);
      line += "score " + std::to_string(*majority_of(o)) + ", phi " + format_phi(o.potential->phi) +
              (o.pass ? ", pass" : ", fail");
      best = std::max(best, *majority_of(o));
      if (o.pass) {
        state_.tree.set_status(child, NodeStatus::kPassed);
        if (!passed) passed = i;
      } else if (static_cast<int>(state_.tree.depth(child)) >= c.max_depth) {
        state_.tree.set_status(child, NodeStatus::kPruned);
      }
    } else {
      state_.tree.set_status(child, NodeStatus::kPruned);
      line += !o.semantic_ok ? "rejected by semantic check"
              : !o.phase1.parse_ok ? "does not parse"
              : !o.error.empty()   ? "not evaluated: " + o.error
                                   : "stopped by static analysis";
    }
    log(line);
  }

  if (passed) {
    state_.finished = true;
    state_.annotation = "pass";
  } else if (!kids.empty()) {
    // Reflect on the most promising failure of the cycle.
    std::size_t pick = 0;
    double best_phi = -1.0;
    for (std::size_t i = 0; i < kids.size(); ++i) {
      const double phi = outcomes[i].potential ? outcomes[i].potential->phi : -1.0;
      if (phi > best_phi) {
        best_phi = phi;
        pick = i;
      }
    }
    const auto lesson = reflect(outcomes[pick], kids[pick], c.original_code, *reflector_);
    const auto retired = update_library(state_.library, lesson, c.threshold_n);
    std::string line = "  reflection on candidate " + std::to_string(kids[pick].candidate_id) +
                       ": fail " + verdict_names(lesson.fail) + "; success " + verdict_names(lesson.success);
    if (lesson.repair_directive) line += "; repair step " + std::to_string(lesson.repair_directive->step_index);
    if (!retired.empty()) line += "; retired " + join_ids(retired);
    log(line);
    flag_node();
  } else {
    flag_node();
  }
  enforce_width_cap();
  finish_cycle(best);
  return true;
}

void Campaign::enforce_width_cap() {
  auto active = state_.tree.active_nodes();
  while (static_cast<int>(active.size()) > state_.config.max_active) {
    NodeId victim = active.front();
    double lowest = state_.tree.clade_potential(victim);
    for (auto id : active) {
      const double p = state_.tree.clade_potential(id);
      if (p < lowest || (p == lowest && id > victim)) {
        lowest = p;
        victim = id;
      }
    }
    state_.tree.set_status(victim, NodeStatus::kPruned);
    log("  node " + std::to_string(victim) + " evicted by the width cap");
    active = state_.tree.active_nodes();
  }
}

CampaignReport Campaign::run() {
  baseline();
  while (!state_.finished) {
    if (options_.stop_after_cycles && cycles_this_run_ >= *options_.stop_after_cycles) break;
    if (!step()) break;
  }
  return report();
}

CampaignReport Campaign::report() const {
  CampaignReport r;
  r.campaign_id = state_.campaign_id;
  r.vuln_label = state_.config.vuln_label;
  r.cycles_used = state_.cycles_completed;
  r.score_trajectory = state_.trajectory;
  r.initial_score = state_.initial_score;
  r.completed = state_.finished;
  r.annotation = state_.annotation;

  std::optional<CandidateId> best;
  int best_score = 0;
  for (const auto& [id, o] : state_.outcomes) {
    if (o.pass) {
      r.pass = true;
      r.passing_candidate = id;
      best = id;
      break;
    }
    if (auto s = majority_of(o); s && *s > best_score) {
      best_score = *s;
      best = id;
    }
  }
  r.best_candidate = best.value_or(0);
  if (auto it = state_.outcomes.find(r.best_candidate); it != state_.outcomes.end()) {
    r.final_score = majority_of(it->second).value_or(state_.initial_score);
    r.static_pass = static_clean(it->second);
  } else {
    r.final_score = state_.initial_score;
  }
  return r;
}

CampaignReport run_campaign(const CampaignConfig& config, const RunOptions& options) {
  Campaign campaign(config, options);
  return campaign.run();
}

CampaignReport resume(const fs::path& dir, RunOptions options) {
  auto state = load_checkpoint(dir);
  options.checkpoint_dir = dir;
  if (state.finished) return load_report(dir);
  Campaign campaign(std::move(state), std::move(options));
  return campaign.run();
}

std::size_t export_dataset(const std::vector<fs::path>& campaign_dirs, const fs::path& out_path) {
  if (campaign_dirs.empty()) throw ValidationError("export_dataset: no campaign directories");
  std::string out;
  std::set<std::string> seen_campaigns;
  std::size_t count = 0;
  for (const auto& dir : campaign_dirs) {
    const auto s = load_checkpoint(dir);
    if (!s.finished) throw CheckpointError(dir.string() + ": campaign has not finished");
    if (!seen_campaigns.insert(s.campaign_id).second) continue;
    for (const auto& [id, c] : s.candidates) {
      if (id == 0) continue;
      auto o = s.outcomes.find(id);
      if (o == s.outcomes.end() || !o->second.admitted) continue;
      json scores = json::object();
      if (!o->second.phase2_runs.empty()) {
        scores[s.config.primary.detector_id] = majority_score(o->second.phase2_runs);
      }
      for (const auto& [model, vote] : o->second.phase3_votes) {
        scores[model] = vote.run ? json(vote.run->risk_score) : json();
      }
      json path = json::array();
      if (auto node = s.tree.node_for_candidate(id)) {
        for (auto n : s.tree.lineage(*node)) path.push_back(n);
      }
      const json record = {{"id", s.campaign_id + "-" + std::to_string(id)},
                           {"vuln_label", s.config.vuln_label},
                           {"original_code", s.config.original_code},
                           {"obfuscated_code", c.code},
                           {"applied_strategies", c.transform_meta.applied_strategies},
                           {"lineage_path", path},
                           {"label", "malicious"},
                           {"final_scores", scores}};
      out += record.dump() + "\n";
      ++count;
    }
  }
  try {
    write_atomic(out_path, out);
  } catch (const CheckpointError& e) {
    throw CheckpointError("cannot write dataset: " + std::string(e.what()));
  }
  return count;
}

}  // namespace lineage
