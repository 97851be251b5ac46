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

#include "lineage/reflection.hpp"

#include <algorithm>
#include <cctype>

#include "lineage/error.hpp"
#include "lineage/json_repair.hpp"
#include "lineage/prompts.hpp"
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

std::optional<RepairDirective> repair_for(const VerifierOutcome& outcome, const Candidate& candidate) {
  const auto& applied = candidate.transform_meta.applied_strategies;
  if ((outcome.phase1.parse_ok && outcome.semantic_ok) || applied.empty()) return std::nullopt;
  RepairDirective r;
  r.step_index = static_cast<int>(applied.size()) - 1;
  r.instruction = "Redo step " + std::to_string(r.step_index + 1) + " (" + applied.back() + ") so that " +
                  (outcome.phase1.parse_ok ? "the program behaves exactly like the original"
                                           : "the program parses");
  return r;
}

}  // namespace

std::vector<std::string> own_steps(const Candidate& candidate) {
  const auto& applied = candidate.transform_meta.applied_strategies;
  const auto begin = std::min(candidate.step_begin, applied.size());
  return {applied.begin() + static_cast<std::ptrdiff_t>(begin), applied.end()};
}

ReflectionResult SimulatedReflector::reflect(const VerifierOutcome& outcome,
                                             const Candidate& candidate, std::string_view) {
  ReflectionResult out;
  const auto steps = own_steps(candidate);
  out.repair_directive = repair_for(outcome, candidate);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& id = steps[i];
    const bool broken_step = out.repair_directive &&
                             i + candidate.step_begin == static_cast<std::size_t>(out.repair_directive->step_index);
    if (broken_step) {
      out.fail.push_back({id, outcome.phase1.parse_ok ? "output changed the program's behavior"
                                                      : "output does not parse"});
      continue;
    }
    const StrategyDescriptor* d = nullptr;
    static const StrategyLibrary kSeed = StrategyLibrary::seed();
    d = kSeed.find(id);
    std::string blame;
    const auto* builtin = find_builtin(id);
    if (builtin != nullptr && builtin->reshapes_statements && !outcome.feedback_digest.flagged_lines.empty()) {
      blame = "detector still locates the sink at line " +
              std::to_string(outcome.feedback_digest.flagged_lines.front());
    }
    if (d != nullptr && blame.empty()) {
      for (const auto& f : outcome.feedback_digest.flagged_features) {
        if (category_for(classify_feature(f)) != d->category) continue;
        blame = "detector still cites `" + f + "`";
        for (const auto& ex : outcome.feedback_digest.reasoning_excerpts) {
          if (ex.find("`" + f + "`") != std::string::npos) {
            blame += ": " + ex;
            break;
          }
        }
        break;
      }
    }
    if (!blame.empty()) {
      out.fail.push_back({id, blame});
    } else {
      out.success.push_back({id, "no flagged feature is of the kind this step hides"});
    }
  }
  return out;
}

RemoteReflector::RemoteReflector(std::shared_ptr<ChatTransport> transport,
                                 RemoteReflectorOptions options)
    : transport_(std::move(transport)), options_(std::move(options)) {
  if (!transport_) throw ValidationError("remote reflector needs a transport");
}

ReflectionResult RemoteReflector::reflect(const VerifierOutcome& outcome, const Candidate& candidate,
                                          std::string_view original) {
  std::string strategy_text;
  const auto steps = own_steps(candidate);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    strategy_text += std::to_string(i + 1) + ". " + steps[i] + "\n";
  }
  ChatRequest req;
  req.model = options_.model_name;
  req.temperature = options_.temperature;
  req.messages.push_back({"user", prompts::reflection_prompt(describe_outcome(outcome), strategy_text,
                                                             original, candidate.code)});
  ReflectionResult out = parse_reflection(transport_->complete(req), candidate);
  out.repair_directive = repair_for(outcome, candidate);
  return out;
}

ReflectionResult parse_reflection(std::string_view raw, const Candidate& candidate) {
  const json doc = extract_json_object(raw);
  if (!doc.contains("success") && !doc.contains("fail")) {
    throw FormatError("reflection has neither success nor fail");
  }
  const auto steps = own_steps(candidate);
  auto resolve = [&](const std::string& name) -> std::optional<std::string> {
    for (const auto& s : steps) {
      if (fold(s) == fold(name)) return s;
    }
    return std::nullopt;
  };
  auto read = [&](const char* key) {
    std::vector<StrategyVerdict> list;
    auto it = doc.find(key);
    if (it == doc.end()) return list;
    if (!it->is_array()) throw FormatError(std::string(key) + " is not a list");
    for (const auto& e : *it) {
      if (!e.is_object()) continue;
      const auto name = resolve(e.value("strategy_name", std::string()));
      if (!name) continue;
      if (std::any_of(list.begin(), list.end(), [&](const auto& v) { return v.strategy_name == *name; })) {
        continue;
      }
      list.push_back({*name, e.value("reason", std::string())});
    }
    return list;
  };
  ReflectionResult out;
  out.fail = read("fail");
  for (auto& v : read("success")) {
    const bool failed = std::any_of(out.fail.begin(), out.fail.end(),
                                    [&](const auto& f) { return f.strategy_name == v.strategy_name; });
    if (!failed) out.success.push_back(std::move(v));
  }
  if (auto it = doc.find("new_strategies"); it != doc.end() && it->is_array()) {
    for (const auto& e : *it) {
      if (!e.is_object()) continue;
      StrategyDescriptor d;
      d.strategy_id = e.value("strategy_name", std::string());
      const auto cat = category_from_string(e.value("category", std::string()));
      if (d.strategy_id.empty() || !cat) continue;
      d.category = *cat;
      d.description = e.value("description", std::string());
      d.source = StrategySource::kReflectionLearned;
      out.new_strategies.push_back(std::move(d));
    }
  }
  return out;
}

ReflectionResult reflect(const VerifierOutcome& outcome, const Candidate& candidate,
                         std::string_view original, ReflectionBackend& backend) {
  if (outcome.pass) throw ValidationError("reflect: outcome passed; reflection runs on failures only");
  try {
    return backend.reflect(outcome, candidate, original);
  } catch (const FormatError&) {
    return {};
  } catch (const TransportError&) {
    return {};
  }
}

std::vector<std::string> update_library(StrategyLibrary& library, const ReflectionResult& result,
                                        std::uint32_t threshold_n) {
  std::vector<std::string> retired;
  for (const auto& f : result.fail) {
    auto* d = library.find(f.strategy_name);
    if (d == nullptr) continue;
    ++d->fail_count;
    if (!d->retired && d->fail_count > threshold_n) {
      d->retired = true;
      retired.push_back(d->strategy_id);
    }
  }
  for (auto d : result.new_strategies) {
    const std::string base = d.strategy_id;
    for (int suffix = 2; library.find(d.strategy_id) != nullptr; ++suffix) {
      d.strategy_id = base + "-" + std::to_string(suffix);
    }
    d.source = StrategySource::kReflectionLearned;
    d.fail_count = 0;
    d.retired = false;
    library.mutable_descriptors().push_back(std::move(d));
  }
  return retired;
}

}  // namespace lineage
