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

#include "lineage/generator.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "lineage/error.hpp"
#include "lineage/json_repair.hpp"
#include "lineage/prompts.hpp"
#include "lineage/pysub.hpp"
#include "lineage/transforms.hpp"

namespace lineage {

using nlohmann::json;

namespace {

std::string fold(std::string_view s) {
  std::string out;
  for (char c : s) {
    const char l = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    out.push_back(l == '_' || l == ' ' ? '-' : l);
  }
  return out;
}

int depth_of(const std::vector<std::string>& ids) {
  int depth = 0;
  for (const auto& id : ids) {
    if (const auto* t = find_builtin(id)) depth += t->depth_increment;
  }
  return depth;
}

std::vector<PlanStep>& slot(ObfuscationPlan& p, StrategyCategory c) {
  switch (c) {
    case StrategyCategory::kLayout: return p.layout;
    case StrategyCategory::kControlFlow: return p.control_flow;
    case StrategyCategory::kDataFlow: return p.data_flow;
  }
  return p.layout;
}

}  // namespace

StrategyLibrary::StrategyLibrary(std::vector<StrategyDescriptor> descriptors)
    : descriptors_(std::move(descriptors)) {
  std::set<std::string> seen;
  for (const auto& d : descriptors_) {
    if (d.strategy_id.empty()) throw ValidationError("strategy library: empty strategy_id");
    if (!seen.insert(d.strategy_id).second) {
      throw ValidationError("strategy library: duplicate strategy_id " + d.strategy_id);
    }
  }
}

StrategyLibrary StrategyLibrary::seed() {
  std::vector<StrategyDescriptor> out;
  for (const auto& t : builtin_transforms()) {
    out.push_back({t.id, t.category, t.description, StrategySource::kSeedLibrary, 0, false});
  }
  // Usable by the remote generator only; no built-in transformer exists.
  out.push_back({"attention-disruption", StrategyCategory::kLayout,
                 "Surround the sensitive region with long benign code that draws the "
                 "reader's attention elsewhere.",
                 StrategySource::kSeedLibrary, 0, false});
  out.push_back({"cot-instability", StrategyCategory::kControlFlow,
                 "Restructure control flow so each reasoning step sees a plausible but "
                 "partial picture of the call sequence.",
                 StrategySource::kSeedLibrary, 0, false});
  out.push_back({"semantic-hallucination", StrategyCategory::kDataFlow,
                 "Give sensitive values misleading names and wrappers that suggest an "
                 "unrelated, harmless purpose.",
                 StrategySource::kSeedLibrary, 0, false});
  return StrategyLibrary(std::move(out));
}

const StrategyDescriptor* StrategyLibrary::find(std::string_view id) const {
  for (const auto& d : descriptors_) {
    if (d.strategy_id == id) return &d;
  }
  return nullptr;
}

StrategyDescriptor* StrategyLibrary::find(std::string_view id) {
  for (auto& d : descriptors_) {
    if (d.strategy_id == id) return &d;
  }
  return nullptr;
}

std::size_t StrategyLibrary::usable_count() const {
  return static_cast<std::size_t>(
      std::count_if(descriptors_.begin(), descriptors_.end(), [](const auto& d) { return !d.retired; }));
}

bool StrategyLibrary::executable(std::string_view id) { return find_builtin(id) != nullptr; }

json StrategyLibrary::to_json() const {
  json arr = json::array();
  for (const auto& d : descriptors_) {
    arr.push_back({{"strategy_id", d.strategy_id},
                   {"category", std::string(to_string(d.category))},
                   {"description", d.description},
                   {"source", std::string(to_string(d.source))},
                   {"fail_count", d.fail_count},
                   {"retired", d.retired}});
  }
  return arr;
}

StrategyLibrary StrategyLibrary::from_json(const json& j) {
  if (!j.is_array()) throw FormatError("strategy library must be a list");
  std::vector<StrategyDescriptor> out;
  for (const auto& e : j) {
    StrategyDescriptor d;
    try {
      d.strategy_id = e.at("strategy_id").get<std::string>();
      const auto cat = category_from_string(e.at("category").get<std::string>());
      if (!cat) throw FormatError("unknown category for " + d.strategy_id);
      d.category = *cat;
      d.description = e.value("description", std::string());
      const auto src = source_from_string(e.value("source", std::string("seed_library")));
      if (!src) throw FormatError("unknown source for " + d.strategy_id);
      d.source = *src;
      d.fail_count = e.value("fail_count", 0u);
      d.retired = e.value("retired", false);
    } catch (const json::exception& ex) {
      throw FormatError(std::string("strategy library entry: ") + ex.what());
    }
    out.push_back(std::move(d));
  }
  try {
    return StrategyLibrary(std::move(out));
  } catch (const ValidationError& e) {
    throw FormatError(e.what());
  }
}

std::vector<std::string> ObfuscationPlan::ordered_strategies() const {
  std::vector<std::string> out;
  for (const auto* list : {&layout, &control_flow, &data_flow}) {
    for (const auto& s : *list) {
      if (std::find(out.begin(), out.end(), s.strategy_category) == out.end()) {
        out.push_back(s.strategy_category);
      }
    }
  }
  return out;
}

json ObfuscationPlan::to_json() const {
  auto list = [](const std::vector<PlanStep>& steps) {
    json arr = json::array();
    for (const auto& s : steps) arr.push_back({{"op", s.op}, {"strategy_category", s.strategy_category}});
    return arr;
  };
  json j = json::object();
  j["Layout"] = list(layout);
  j["Control_Flow"] = list(control_flow);
  j["Data_Flow"] = list(data_flow);
  return j;
}

ObfuscationPlan parse_plan(std::string_view raw, const StrategyLibrary& library) {
  const json doc = extract_json_object(raw);
  ObfuscationPlan out;
  const std::pair<const char*, StrategyCategory> sections[] = {
      {"layout", StrategyCategory::kLayout},
      {"control-flow", StrategyCategory::kControlFlow},
      {"data-flow", StrategyCategory::kDataFlow}};
  bool any_section = false;
  for (const auto& [name, cat] : sections) {
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      if (fold(it.key()) != name) continue;
      any_section = true;
      if (!it.value().is_array()) throw FormatError(it.key() + " is not a list");
      for (const auto& entry : it.value()) {
        if (!entry.is_object()) continue;
        const std::string wanted = entry.value("strategy_category", std::string());
        const StrategyDescriptor* match = nullptr;
        for (const auto& d : library.descriptors()) {
          if (!d.retired && fold(d.strategy_id) == fold(wanted)) {
            match = &d;
            break;
          }
        }
        if (match == nullptr) continue;
        slot(out, cat).push_back({entry.value("op", std::string()), match->strategy_id});
      }
    }
  }
  if (!any_section) throw FormatError("plan has none of Layout, Control_Flow, Data_Flow");
  if (out.empty()) throw GenerationError("plan names no usable strategy");
  return out;
}

ObfuscationPlan SimulatedGenerator::plan(std::string_view code, const ReflectionDigest& feedback,
                                         const StrategyLibrary& library,
                                         const std::vector<std::vector<std::string>>&) {
  std::optional<pysub::Module> parsed;
  try {
    parsed = pysub::parse(code);
  } catch (const FormatError&) {
  }
  auto applicable = [&](const StrategyDescriptor& d) {
    if (d.retired) return false;
    const auto* t = find_builtin(d.strategy_id);
    if (t == nullptr) return false;
    if (!parsed) return true;
    Rng probe(0);
    return t->apply(*parsed, probe).applied;
  };

  ObfuscationPlan out;
  for (auto cat : {StrategyCategory::kLayout, StrategyCategory::kControlFlow,
                   StrategyCategory::kDataFlow}) {
    std::string ops;
    for (const auto& f : feedback.flagged_features) {
      if (category_for(classify_feature(f)) != cat) continue;
      ops += (ops.empty() ? "" : ", ") + f;
    }
    if (ops.empty()) continue;
    for (const auto& d : library.descriptors()) {
      if (d.category == cat && applicable(d)) {
        slot(out, cat).push_back({ops, d.strategy_id});
        break;
      }
    }
  }
  // Without any cited feature there is nothing to aim at; fall back to the
  // first applicable strategy. When features were cited but no strategy of
  // their categories applies, give up rather than apply an untargeted one.
  if (out.empty() && feedback.flagged_features.empty()) {
    for (const auto& d : library.descriptors()) {
      if (applicable(d)) {
        slot(out, d.category).push_back({"whole program", d.strategy_id});
        break;
      }
    }
  }
  if (out.empty()) throw GenerationError("no usable strategy applies to the current code");
  return out;
}

std::vector<GeneratorBackend::Variant> SimulatedGenerator::synthesize(std::string_view code,
                                                                      const ObfuscationPlan& plan,
                                                                      int width_k,
                                                                      std::uint64_t seed) {
  const pysub::Module base = pysub::parse(code);
  const auto steps = plan.ordered_strategies();
  std::vector<Variant> out;
  for (int j = 0; j < width_k; ++j) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(j)}));
    pysub::Module m = base;
    Variant v;
    for (const auto& id : steps) {
      const auto* t = find_builtin(id);
      if (t == nullptr) continue;
      auto r = t->apply(m, rng);
      if (!r.applied) continue;
      m = std::move(r.module);
      v.applied.push_back(id);
      v.depth_increment += t->depth_increment;
    }
    v.code = pysub::print(m);
    out.push_back(std::move(v));
  }
  return out;
}

RemoteGenerator::RemoteGenerator(std::shared_ptr<ChatTransport> transport,
                                 RemoteGeneratorOptions options)
    : transport_(std::move(transport)), options_(std::move(options)) {
  if (!transport_) throw ValidationError("remote generator needs a transport");
}

ObfuscationPlan RemoteGenerator::plan(std::string_view code, const ReflectionDigest& feedback,
                                      const StrategyLibrary& library,
                                      const std::vector<std::vector<std::string>>& failed_lineages) {
  ChatRequest req;
  req.model = options_.model_name;
  req.temperature = options_.temperature;
  req.messages.push_back(
      {"user", prompts::planning_prompt(code, describe(feedback),
                                        prompts::policy_section(library.descriptors(), failed_lineages))});
  const std::string reply = transport_->complete(req);
  try {
    return parse_plan(reply, library);
  } catch (const FormatError& e) {
    throw GenerationError(std::string("unparseable plan: ") + e.what());
  }
}

std::vector<GeneratorBackend::Variant> RemoteGenerator::synthesize(std::string_view code,
                                                                   const ObfuscationPlan& plan,
                                                                   int width_k, std::uint64_t) {
  const std::string plan_text = plan.to_json().dump(2);
  const auto steps = plan.ordered_strategies();
  std::vector<Variant> out;
  for (int j = 0; j < width_k; ++j) {
    ChatRequest req;
    req.model = options_.model_name;
    req.temperature = options_.temperature;
    req.messages.push_back({"user", prompts::synthesis_prompt(code, plan_text, j + 1)});
    Variant v;
    v.code = extract_code_block(transport_->complete(req));
    v.applied = steps;
    v.depth_increment = depth_of(steps);
    out.push_back(std::move(v));
  }
  return out;
}

ObfuscationPlan plan(std::string_view code, const ReflectionDigest& feedback,
                     const StrategyLibrary& library, GeneratorBackend& backend,
                     const std::vector<std::vector<std::string>>& failed_lineages) {
  if (library.usable_count() == 0) throw GenerationError("every strategy in the library is retired");
  ObfuscationPlan p = backend.plan(code, feedback, library, failed_lineages);
  for (const auto& id : p.ordered_strategies()) {
    const auto* d = library.find(id);
    if (d == nullptr || d->retired) throw GenerationError("plan uses unusable strategy " + id);
  }
  return p;
}

std::vector<Candidate> synthesize(const Candidate& parent, NodeId origin_node,
                                  const ObfuscationPlan& plan, int width_k,
                                  GeneratorBackend& backend, std::uint64_t seed,
                                  CandidateId first_id) {
  if (width_k < 1) throw ValidationError("width_k must be positive");
  const auto variants = backend.synthesize(parent.code, plan, width_k, seed);
  const bool check_parse = parent.language_tag == pysub::kLanguageTag;
  std::vector<Candidate> out;
  std::set<std::string> seen{parent.code};
  std::string reasons;
  for (std::size_t i = 0; i < variants.size(); ++i) {
    const auto& v = variants[i];
    std::string why;
    if (v.code.empty()) {
      why = "empty output";
    } else if (v.applied.empty()) {
      why = "no strategy applied";
    } else if (check_parse && !pysub::parses(v.code, &why)) {
      why = "does not parse: " + why;
    } else if (!seen.insert(v.code).second) {
      why = "duplicate";
    }
    if (!why.empty()) {
      reasons += "variant " + std::to_string(i + 1) + ": " + why + "; ";
      continue;
    }
    Candidate c;
    c.candidate_id = first_id + out.size();
    c.code = v.code;
    c.origin_node = origin_node;
    c.language_tag = parent.language_tag;
    c.transform_meta.indirection_depth = parent.transform_meta.indirection_depth + v.depth_increment;
    c.transform_meta.applied_strategies = parent.transform_meta.applied_strategies;
    c.step_begin = c.transform_meta.applied_strategies.size();
    for (const auto& id : v.applied) c.transform_meta.applied_strategies.push_back(id);
    out.push_back(std::move(c));
  }
  if (out.empty()) throw GenerationError("all candidates rejected: " + reasons);
  return out;
}

std::string extract_code_block(std::string_view reply) {
  const auto open = reply.find("```");
  if (open == std::string_view::npos) return std::string(reply);
  auto body = reply.find('\n', open);
  if (body == std::string_view::npos) return {};
  ++body;
  const auto close = reply.find("```", body);
  return std::string(reply.substr(body, close == std::string_view::npos ? std::string_view::npos
                                                                         : close - body));
}

}  // namespace lineage
