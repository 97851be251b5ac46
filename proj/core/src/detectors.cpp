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

#include "lineage/detectors.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "lineage/error.hpp"
#include "lineage/json_repair.hpp"
#include "lineage/prompts.hpp"
#include "lineage/pysub.hpp"
#include "lineage/random.hpp"

namespace lineage {

using nlohmann::json;

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      if (start < text.size()) out.push_back(text.substr(start));
      break;
    }
    out.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return out;
}

struct Located {
  int line = 0;  // 1-based, 0 when unknown
  std::string function;
};

Located locate(std::string_view text, std::string_view pattern) {
  Located out;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find(pattern) == std::string_view::npos) continue;
    out.line = static_cast<int>(i + 1);
    for (std::size_t j = i + 1; j-- > 0;) {
      if (lines[j].rfind("def ", 0) == 0) {
        const auto open = lines[j].find('(');
        out.function = std::string(lines[j].substr(4, open == std::string_view::npos ? 0 : open - 4));
        break;
      }
    }
    break;
  }
  return out;
}

std::string deobfuscated_text(std::string_view code) {
  try {
    return pysub::print(pysub::deobfuscate(pysub::parse(code)));
  } catch (const FormatError&) {
    return {};
  }
}

// The literal an indirection would have to spell out to reach the pattern.
std::string resolving_literal(const std::string& pattern) {
  if (!pattern.empty() && (pattern.front() == '"' || pattern.front() == '\'')) return pattern;
  const auto dot = pattern.rfind('.');
  if (dot != std::string::npos) {
    std::string attr = pattern.substr(dot + 1);
    while (!attr.empty() && !(std::isalnum(static_cast<unsigned char>(attr.back())) || attr.back() == '_')) {
      attr.pop_back();
    }
    return pysub::quote(attr);
  }
  return pattern;
}

int parse_score(const json& v) {
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d == static_cast<int>(d)) return static_cast<int>(d);
    throw FormatError("score is not an integer");
  }
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    s.erase(0, s.find_first_not_of(" \t\r\n"));
    s.erase(s.find_last_not_of(" \t\r\n") + 1);
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); }) ||
        s.size() > 3) {
      throw FormatError("score is not an integer: \"" + v.get<std::string>() + "\"");
    }
    return std::stoi(s);
  }
  throw FormatError("score has unsupported JSON type");
}

void append_strings(const json& v, std::vector<std::string>& out) {
  if (v.is_string()) {
    out.push_back(v.get<std::string>());
  } else if (v.is_array()) {
    for (const auto& x : v) {
      if (x.is_string()) out.push_back(x.get<std::string>());
    }
  }
}

}  // namespace

std::string_view to_string(DetectorKind k) {
  return k == DetectorKind::kSimulated ? "simulated" : "remote";
}

void BlindSpotConfig::validate() const {
  if (base_rules.empty()) throw ValidationError("base_rules: at least one rule is required");
  for (std::size_t i = 0; i < base_rules.size(); ++i) {
    const auto& r = base_rules[i];
    const std::string at = "base_rules[" + std::to_string(i) + "]";
    if (r.pattern.empty()) throw ValidationError(at + ".pattern: must be nonempty");
    if (r.score < 1 || r.score > 4) throw ValidationError(at + ".score: must lie in [1, 4]");
    if (r.vuln_type.empty()) throw ValidationError(at + ".vuln_type: must be nonempty");
  }
  if (indirection_blindness_depth < 1) {
    throw ValidationError("indirection_blindness_depth: must be positive");
  }
  if (!(type_confusion_prob >= 0.0 && type_confusion_prob <= 1.0)) {
    throw ValidationError("type_confusion_prob: must lie in [0, 1]");
  }
  if (!(score_jitter_prob >= 0.0 && score_jitter_prob <= 1.0)) {
    throw ValidationError("score_jitter_prob: must lie in [0, 1]");
  }
}

void DetectorSpec::validate() const {
  if (detector_id.empty()) throw ValidationError("detector_id: must be nonempty");
  if (!(temperature >= 0.0)) throw ValidationError("temperature: must be >= 0");
  if (max_rounds < 1) throw ValidationError("max_rounds: must be positive");
  if (timeout.count() <= 0) throw ValidationError("timeout_ms: must be positive");
  if (max_retries < 0) throw ValidationError("max_retries: must be >= 0");
  if (kind == DetectorKind::kRemote) {
    if (!endpoint || endpoint->empty()) {
      throw ValidationError("endpoint: required when kind is remote");
    }
    if (!model_name || model_name->empty()) {
      throw ValidationError("model_name: required when kind is remote");
    }
  } else {
    if (!blind_spots) throw ValidationError("blind_spots: required when kind is simulated");
    try {
      blind_spots->validate();
    } catch (const ValidationError& e) {
      throw ValidationError(std::string("blind_spots.") + e.what());
    }
  }
}

const std::vector<std::string>& confusion_pool() {
  static const std::vector<std::string> kPool = {
      "sql-injection",        "cross-site-scripting", "hardcoded-credentials",
      "race-condition",       "buffer-overflow",      "open-redirect",
      "information-exposure", "integer-overflow",
  };
  return kPool;
}

DetectionRun Detector::detect(std::string_view code, const DetectionContext& ctx) {
  if (code.empty()) throw ValidationError("detect: empty code");
  ++calls_;
  DetectionRun run_out = run(code, ctx);
  run_out.model_id = id_;
  run_out.round_index = ctx.round_index;
  run_out.temperature = ctx.temperature;
  run_out.paraphrased = ctx.paraphrase;
  return run_out;
}

SimulatedDetector::SimulatedDetector(std::string id, BlindSpotConfig config)
    : Detector(std::move(id)), config_(std::move(config)) {
  config_.validate();
}

std::vector<DetectionRule> SimulatedDetector::fired_rules(std::string_view code,
                                                          int indirection_depth) const {
  std::vector<DetectionRule> out;
  std::string resolved;
  bool resolved_ready = false;
  for (const auto& rule : config_.base_rules) {
    if (code.find(rule.pattern) != std::string_view::npos) {
      out.push_back(rule);
      continue;
    }
    if (indirection_depth >= config_.indirection_blindness_depth) continue;
    if (!resolved_ready) {
      resolved = deobfuscated_text(code);
      resolved_ready = true;
    }
    if (resolved.find(rule.pattern) != std::string::npos) out.push_back(rule);
  }
  return out;
}

DetectionRun SimulatedDetector::run(std::string_view code, const DetectionContext& ctx) {
  Rng rng(derive_seed(config_.seed, {ctx.candidate_id, static_cast<std::uint64_t>(ctx.round_index)}));
  const auto fired = fired_rules(code, ctx.indirection_depth);
  DetectionRun out;
  out.risk_score = kMaxRiskScore;
  int step = 1;
  auto say = [&](const std::string& s) {
    out.reasoning_chain.push_back("Step " + std::to_string(step++) + ": " + s);
  };
  if (fired.empty()) {
    say("Read the program and traced each call and string constant.");
    say("No dangerous call or literal reaches a sink.");
    say("No clear vulnerability.");
  } else {
    std::string resolved;
    for (const auto& rule : fired) {
      out.risk_score = std::min(out.risk_score, rule.score);
      if (std::find(out.vuln_types.begin(), out.vuln_types.end(), rule.vuln_type) ==
          out.vuln_types.end()) {
        out.vuln_types.push_back(rule.vuln_type);
      }
      const bool verbatim = code.find(rule.pattern) != std::string_view::npos;
      if (!verbatim && resolved.empty()) resolved = deobfuscated_text(code);
      const Located where = locate(verbatim ? code : std::string_view(resolved), rule.pattern);
      if (where.line > 0) out.finding_lines.push_back(where.line);
      std::string msg = "`" + rule.pattern + "`";
      if (!where.function.empty()) msg += " in function `" + where.function + "`";
      if (where.line > 0) msg += " at line " + std::to_string(where.line);
      say(msg + " is a " + rule.vuln_type + " sink.");
      if (!verbatim) {
        say("The indirection built from literal `" + resolving_literal(rule.pattern) +
            "` resolves to `" + rule.pattern + "`.");
      }
    }
    if (rng.bernoulli(config_.type_confusion_prob)) {
      std::vector<std::string> wrong;
      for (const auto& t : confusion_pool()) {
        if (std::find(out.vuln_types.begin(), out.vuln_types.end(), t) == out.vuln_types.end()) {
          wrong.push_back(t);
        }
      }
      out.vuln_types.front() = wrong[rng.below(wrong.size())];
    }
    say("Risk confirmed.");
  }
  if (rng.bernoulli(config_.score_jitter_prob)) {
    out.risk_score += rng.bernoulli(0.5) ? 1 : -1;
    out.risk_score = std::clamp(out.risk_score, kMinRiskScore, kMaxRiskScore);
  }
  normalize_run(out);
  json raw = {{"score", std::to_string(out.risk_score)},
              {"types", out.vuln_types},
              {"reasoning_chain", out.reasoning_chain}};
  out.raw_text = raw.dump();
  return out;
}

RemoteDetector::RemoteDetector(DetectorSpec spec, std::shared_ptr<ChatTransport> transport)
    : Detector(spec.detector_id), spec_(std::move(spec)), transport_(std::move(transport)) {
  if (!transport_) throw ValidationError("remote detector needs a transport");
}

DetectionRun RemoteDetector::run(std::string_view code, const DetectionContext& ctx) {
  ChatRequest req;
  req.model = spec_.model_name.value_or("");
  req.temperature = ctx.temperature;
  req.messages.push_back({"user", prompts::detector_prompt(code, ctx.paraphrase)});
  return parse_report(transport_->complete(req));
}

std::unique_ptr<Detector> make_detector(const DetectorSpec& spec,
                                        std::shared_ptr<ChatTransport> transport) {
  spec.validate();
  if (spec.kind == DetectorKind::kSimulated) {
    return std::make_unique<SimulatedDetector>(spec.detector_id, *spec.blind_spots);
  }
  if (!transport) {
    HttpChatOptions opts;
    opts.endpoint = *spec.endpoint;
    opts.api_key_env = spec.api_key_env;
    opts.timeout = spec.timeout;
    opts.max_retries = spec.max_retries;
    transport = std::make_shared<HttpChatTransport>(opts);
  }
  return std::make_unique<RemoteDetector>(spec, std::move(transport));
}

DetectionRun parse_report(std::string_view raw) {
  const json doc = extract_json_object(raw);
  DetectionRun out;
  out.raw_text = std::string(raw);
  auto score_it = doc.find("score");
  if (score_it == doc.end()) throw FormatError("reply has no score");
  const int score = parse_score(*score_it);
  if (score < kMinRiskScore || score > kMaxRiskScore) {
    throw FormatError("score " + std::to_string(score) + " outside [1, 5]");
  }
  out.risk_score = score;
  if (auto v = doc.find("vulnerabilities"); v != doc.end()) {
    if (!v->is_array()) throw FormatError("vulnerabilities is not a list");
    for (const auto& f : *v) {
      if (!f.is_object()) continue;
      if (auto t = f.find("type"); t != f.end() && t->is_string()) {
        out.vuln_types.push_back(t->get<std::string>());
      }
      if (auto p = f.find("position"); p != f.end()) {
        if (p->is_number_integer() && p->get<int>() > 0) {
          out.finding_lines.push_back(p->get<int>());
        } else if (p->is_string()) {
          const auto s = p->get<std::string>();
          if (!s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); }) &&
              s.size() < 7) {
            out.finding_lines.push_back(std::stoi(s));
          }
        }
      }
      if (auto rc = f.find("reasoning_chain"); rc != f.end()) append_strings(*rc, out.reasoning_chain);
    }
  }
  if (auto rc = doc.find("reasoning_chain"); rc != doc.end()) append_strings(*rc, out.reasoning_chain);
  normalize_run(out);
  return out;
}

}  // namespace lineage
