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

#include "lineage/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "lineage/error.hpp"
#include "lineage/fixtures.hpp"
#include "lineage/pysub.hpp"
#include "lineage/random.hpp"

namespace lineage {

using nlohmann::json;

std::string_view to_string(CampaignMode m) {
  switch (m) {
    case CampaignMode::kSimulated:
      return "simulated";
    case CampaignMode::kRemote:
      return "remote";
    case CampaignMode::kMixed:
      return "mixed";
  }
  return "simulated";
}

namespace {

std::optional<std::string> read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string join(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

class Reader {
 public:
  std::vector<ConfigViolation> violations;

  void fail(const std::string& path, const std::string& message) {
    violations.push_back({path, message});
  }

  bool object(const json& j, const std::string& path) {
    if (j.is_object()) return true;
    fail(path, "must be an object");
    return false;
  }

  void known_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : obj.items()) {
      if (allowed.count(k) == 0) fail(join(path, k), "unknown key");
    }
  }

  template <typename T>
  std::optional<T> get(const json& obj, const std::string& key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    try {
      if constexpr (std::is_same_v<T, std::string>) {
        if (!it->is_string()) throw std::invalid_argument("");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw std::invalid_argument("");
      } else if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_integer()) throw std::invalid_argument("");
        if constexpr (std::is_unsigned_v<T>) {
          if (it->is_number_integer() && !it->is_number_unsigned() && it->get<std::int64_t>() < 0) {
            throw std::invalid_argument("");
          }
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) throw std::invalid_argument("");
      }
      return it->get<T>();
    } catch (const std::exception&) {
      fail(join(path, key), std::string("must be ") + kind_name<T>());
      return std::nullopt;
    }
  }

  template <typename T>
  T get_or(const json& obj, const std::string& key, const std::string& path, T fallback) {
    return get<T>(obj, key, path).value_or(fallback);
  }

  std::vector<std::string> strings(const json& obj, const std::string& key, const std::string& path) {
    std::vector<std::string> out;
    auto it = obj.find(key);
    if (it == obj.end()) return out;
    if (!it->is_array()) {
      fail(join(path, key), "must be a list of strings");
      return out;
    }
    for (std::size_t i = 0; i < it->size(); ++i) {
      if (!(*it)[i].is_string()) {
        fail(join(path, key) + "[" + std::to_string(i) + "]", "must be a string");
        continue;
      }
      out.push_back((*it)[i].get<std::string>());
    }
    return out;
  }

 private:
  template <typename T>
  static const char* kind_name() {
    if constexpr (std::is_same_v<T, std::string>) return "a string";
    if constexpr (std::is_same_v<T, bool>) return "a boolean";
    if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>) return "a non-negative integer";
    if constexpr (std::is_integral_v<T>) return "an integer";
    return "a number";
  }
};

struct Context {
  std::uint64_t rng_seed = 0;
  const FixtureProgram* fixture = nullptr;
};

std::optional<BlindSpotConfig> read_blind_spots(Reader& r, const json& j, const std::string& path,
                                                const std::string& detector_id, const Context& ctx) {
  if (!r.object(j, path)) return std::nullopt;
  r.known_keys(j, path, {"rules", "indirection_blindness_depth", "type_confusion_prob",
                         "score_jitter_prob", "seed"});
  BlindSpotConfig b;
  if (auto it = j.find("rules"); it != j.end()) {
    if (!it->is_array()) {
      r.fail(join(path, "rules"), "must be a list");
    } else {
      for (std::size_t i = 0; i < it->size(); ++i) {
        const std::string at = join(path, "rules") + "[" + std::to_string(i) + "]";
        const auto& e = (*it)[i];
        if (!r.object(e, at)) continue;
        r.known_keys(e, at, {"pattern", "score", "vuln_type"});
        DetectionRule rule;
        rule.pattern = r.get_or<std::string>(e, "pattern", at, "");
        rule.score = r.get_or<int>(e, "score", at, 0);
        rule.vuln_type = r.get_or<std::string>(e, "vuln_type", at, "");
        b.base_rules.push_back(std::move(rule));
      }
    }
  } else if (ctx.fixture != nullptr) {
    b.base_rules.push_back(ctx.fixture->rule);
  } else {
    r.fail(join(path, "rules"), "required when no fixture supplies a default rule");
  }
  b.indirection_blindness_depth = r.get_or<int>(j, "indirection_blindness_depth", path, 1);
  b.type_confusion_prob = r.get_or<double>(j, "type_confusion_prob", path, 0.0);
  b.score_jitter_prob = r.get_or<double>(j, "score_jitter_prob", path, 0.0);
  b.seed = r.get_or<std::uint64_t>(j, "seed", path, derive_seed(ctx.rng_seed, {hash_string(detector_id)}));
  return b;
}

std::optional<DetectorSpec> read_detector(Reader& r, const json& j, const std::string& path,
                                          const Context& ctx) {
  if (!r.object(j, path)) return std::nullopt;
  r.known_keys(j, path, {"id", "kind", "endpoint", "model_name", "temperature", "max_rounds",
                         "timeout_ms", "max_retries", "api_key_env", "blind_spots"});
  const std::size_t before = r.violations.size();
  DetectorSpec d;
  d.detector_id = r.get_or<std::string>(j, "id", path, "");
  if (d.detector_id.empty()) r.fail(join(path, "id"), "required");
  const auto kind = r.get_or<std::string>(j, "kind", path, "simulated");
  if (kind == "simulated") {
    d.kind = DetectorKind::kSimulated;
  } else if (kind == "remote") {
    d.kind = DetectorKind::kRemote;
  } else {
    r.fail(join(path, "kind"), "must be \"simulated\" or \"remote\"");
  }
  d.endpoint = r.get<std::string>(j, "endpoint", path);
  d.model_name = r.get<std::string>(j, "model_name", path);
  d.temperature = r.get_or<double>(j, "temperature", path, 0.0);
  d.max_rounds = r.get_or<int>(j, "max_rounds", path, 1);
  d.timeout = std::chrono::milliseconds(r.get_or<std::int64_t>(j, "timeout_ms", path, 30000));
  d.max_retries = r.get_or<int>(j, "max_retries", path, 2);
  d.api_key_env = r.get_or<std::string>(j, "api_key_env", path, "");
  if (d.kind == DetectorKind::kRemote) {
    if (!d.endpoint || d.endpoint->empty()) {
      r.fail(join(path, "endpoint"), "required when kind is remote");
    }
    if (!d.model_name || d.model_name->empty()) {
      r.fail(join(path, "model_name"), "required when kind is remote");
    }
    if (j.contains("blind_spots")) r.fail(join(path, "blind_spots"), "only allowed when kind is simulated");
  } else {
    const json empty = json::object();
    auto it = j.find("blind_spots");
    d.blind_spots = read_blind_spots(r, it == j.end() ? empty : *it, join(path, "blind_spots"),
                                     d.detector_id, ctx);
  }
  if (r.violations.size() == before) {
    try {
      d.validate();
    } catch (const ValidationError& e) {
      r.fail(path, e.what());
    }
  }
  return d;
}

std::optional<AdapterSpec> read_adapter(Reader& r, const json& j, const std::string& path) {
  if (!r.object(j, path)) return std::nullopt;
  AdapterSpec a;
  const auto type = r.get_or<std::string>(j, "type", path, "");
  if (type == "builtin") {
    r.known_keys(j, path, {"type"});
    return a;
  }
  if (type != "external") {
    r.fail(join(path, "type"), "must be \"builtin\" or \"external\"");
    return std::nullopt;
  }
  r.known_keys(j, path, {"type", "id", "command", "args", "parser", "file_suffix", "timeout_ms"});
  a.builtin = false;
  auto& e = a.external;
  e.adapter_id = r.get_or<std::string>(j, "id", path, "");
  if (e.adapter_id.empty()) r.fail(join(path, "id"), "required for external adapters");
  e.command = r.get_or<std::string>(j, "command", path, "");
  if (e.command.empty()) r.fail(join(path, "command"), "required for external adapters");
  e.args = r.strings(j, "args", path);
  e.findings_parser = r.get_or<std::string>(j, "parser", path, "");
  const auto& parsers = findings_parsers();
  if (std::find(parsers.begin(), parsers.end(), e.findings_parser) == parsers.end()) {
    std::string names;
    for (const auto& p : parsers) names += (names.empty() ? "" : ", ") + p;
    r.fail(join(path, "parser"), "must be one of " + names);
  }
  e.file_suffix = r.get_or<std::string>(j, "file_suffix", path, ".py");
  e.timeout = std::chrono::milliseconds(r.get_or<std::int64_t>(j, "timeout_ms", path, 60000));
  if (e.timeout.count() <= 0) r.fail(join(path, "timeout_ms"), "must be positive");
  return a;
}

void positive(Reader& r, long long v, const char* key) {
  if (v < 1) r.fail(key, "must be >= 1");
}

}  // namespace

ConfigParseResult parse_config(const json& doc, std::optional<std::uint64_t> seed_override) {
  Reader r;
  ConfigParseResult result;
  if (!doc.is_object()) {
    r.fail("$", "config must be an object");
    result.violations = r.violations;
    return result;
  }
  r.known_keys(doc, "", {"label", "fixture", "original_code", "original_path", "tests", "tests_path",
                         "language_tag", "mode", "budget_cycles", "width_k", "k_rounds",
                         "threshold_n", "rng_seed", "max_depth", "max_active", "detectors",
                         "adapters", "generator", "semantic_hook", "library_path", "parallel"});
  CampaignConfig c;
  Context ctx;

  // Program under test.
  const auto fixture_name = r.get<std::string>(doc, "fixture", "");
  if (fixture_name) {
    ctx.fixture = find_fixture(*fixture_name);
    if (ctx.fixture == nullptr) r.fail("fixture", "unknown fixture \"" + *fixture_name + "\"");
  }
  const auto inline_code = r.get<std::string>(doc, "original_code", "");
  const auto code_path = r.get<std::string>(doc, "original_path", "");
  const int sources = (fixture_name ? 1 : 0) + (inline_code ? 1 : 0) + (code_path ? 1 : 0);
  if (sources != 1) {
    r.fail("original_code", "exactly one of fixture, original_code and original_path is required");
  }
  if (inline_code) c.original_code = *inline_code;
  if (code_path) {
    if (auto text = read_file(*code_path)) {
      c.original_code = *text;
    } else {
      r.fail("original_path", "cannot read " + *code_path);
    }
  }
  if (ctx.fixture != nullptr) c.original_code = ctx.fixture->code;
  c.vuln_label = r.get_or<std::string>(doc, "label", "", ctx.fixture ? ctx.fixture->label : "");
  if (c.vuln_label.empty()) r.fail("label", "required unless a fixture is named");
  c.language_tag = r.get_or<std::string>(doc, "language_tag", "", std::string(pysub::kLanguageTag));
  if (c.language_tag == pysub::kLanguageTag && !c.original_code.empty()) {
    std::string err;
    if (!pysub::parses(c.original_code, &err)) r.fail("original_code", "does not parse: " + err);
  }

  // Scalars.
  const auto mode = r.get_or<std::string>(doc, "mode", "", "simulated");
  if (mode == "simulated") {
    c.mode = CampaignMode::kSimulated;
  } else if (mode == "remote") {
    c.mode = CampaignMode::kRemote;
  } else if (mode == "mixed") {
    c.mode = CampaignMode::kMixed;
  } else {
    r.fail("mode", "must be simulated, remote or mixed");
  }
  c.budget_cycles = r.get_or<int>(doc, "budget_cycles", "", c.budget_cycles);
  positive(r, c.budget_cycles, "budget_cycles");
  c.width_k = r.get_or<int>(doc, "width_k", "", c.width_k);
  positive(r, c.width_k, "width_k");
  c.k_rounds = r.get_or<int>(doc, "k_rounds", "", c.k_rounds);
  if (c.k_rounds < 3 || c.k_rounds % 2 == 0) {
    r.fail("k_rounds", "must be an odd integer >= 3 (parity rule: a strict majority needs an odd round count)");
  }
  const auto n = r.get_or<std::int64_t>(doc, "threshold_n", "", c.threshold_n);
  positive(r, n, "threshold_n");
  c.threshold_n = static_cast<std::uint32_t>(std::max<std::int64_t>(n, 0));
  c.rng_seed = seed_override.value_or(r.get_or<std::uint64_t>(doc, "rng_seed", "", 0));
  ctx.rng_seed = c.rng_seed;
  c.max_depth = r.get_or<int>(doc, "max_depth", "", c.max_depth);
  positive(r, c.max_depth, "max_depth");
  c.max_active = r.get_or<int>(doc, "max_active", "", c.max_active);
  positive(r, c.max_active, "max_active");
  c.library_path = r.get_or<std::string>(doc, "library_path", "", "");
  c.parallel = r.get_or<bool>(doc, "parallel", "", true);

  // Detectors.
  auto det = doc.find("detectors");
  if (det == doc.end()) {
    r.fail("detectors", "required");
  } else if (r.object(*det, "detectors")) {
    r.known_keys(*det, "detectors", {"primary", "ensemble"});
    if (auto p = det->find("primary"); p == det->end()) {
      r.fail("detectors.primary", "required");
    } else if (auto spec = read_detector(r, *p, "detectors.primary", ctx)) {
      c.primary = *spec;
    }
    auto ens = det->find("ensemble");
    if (ens == det->end() || !ens->is_array() || ens->empty()) {
      r.fail("detectors.ensemble", "a list of at least one detector is required");
    } else {
      for (std::size_t i = 0; i < ens->size(); ++i) {
        if (auto spec = read_detector(r, (*ens)[i], "detectors.ensemble[" + std::to_string(i) + "]", ctx)) {
          c.ensemble.push_back(*spec);
        }
      }
    }
    std::set<std::string> ids{c.primary.detector_id};
    for (std::size_t i = 0; i < c.ensemble.size(); ++i) {
      if (!ids.insert(c.ensemble[i].detector_id).second) {
        r.fail("detectors.ensemble[" + std::to_string(i) + "].id",
               "duplicates another detector id; the primary may not sit in the ensemble");
      }
    }
  }

  // Generator.
  if (auto g = doc.find("generator"); g != doc.end() && r.object(*g, "generator")) {
    r.known_keys(*g, "generator", {"backend", "endpoint", "model_name", "api_key_env", "temperature",
                                   "timeout_ms", "max_retries"});
    const auto backend = r.get_or<std::string>(*g, "backend", "generator", "simulated");
    if (backend == "remote") {
      c.generator.remote = true;
    } else if (backend != "simulated") {
      r.fail("generator.backend", "must be \"simulated\" or \"remote\"");
    }
    c.generator.endpoint = r.get_or<std::string>(*g, "endpoint", "generator", "");
    c.generator.model_name = r.get_or<std::string>(*g, "model_name", "generator", "");
    c.generator.api_key_env = r.get_or<std::string>(*g, "api_key_env", "generator", "");
    c.generator.temperature = r.get_or<double>(*g, "temperature", "generator", 0.7);
    c.generator.timeout =
        std::chrono::milliseconds(r.get_or<std::int64_t>(*g, "timeout_ms", "generator", 120000));
    c.generator.max_retries = r.get_or<int>(*g, "max_retries", "generator", 2);
    if (c.generator.remote) {
      if (c.generator.endpoint.empty()) r.fail("generator.endpoint", "required when backend is remote");
      if (c.generator.model_name.empty()) {
        r.fail("generator.model_name", "required when backend is remote");
      }
    }
  }

  // Static adapters.
  if (auto a = doc.find("adapters"); a == doc.end()) {
    c.adapters.push_back(AdapterSpec{});
  } else if (!a->is_array()) {
    r.fail("adapters", "must be a list");
  } else {
    std::set<std::string> ids;
    for (std::size_t i = 0; i < a->size(); ++i) {
      const std::string at = "adapters[" + std::to_string(i) + "]";
      if (auto spec = read_adapter(r, (*a)[i], at)) {
        const std::string id = spec->builtin ? "builtin-patterns" : spec->external.adapter_id;
        if (!ids.insert(id).second) r.fail(at, "duplicate adapter " + id);
        c.adapters.push_back(*spec);
      }
    }
  }

  // Semantic hook.
  std::optional<std::string> tests = r.get<std::string>(doc, "tests", "");
  if (auto tp = r.get<std::string>(doc, "tests_path", "")) {
    if (tests) r.fail("tests_path", "give tests or tests_path, not both");
    tests = read_file(*tp);
    if (!tests) r.fail("tests_path", "cannot read " + *tp);
  }
  if (!tests && ctx.fixture != nullptr) tests = ctx.fixture->tests;
  const json empty = json::object();
  const auto h_it = doc.find("semantic_hook");
  const json& hook = h_it == doc.end() ? empty : *h_it;
  if (r.object(hook, "semantic_hook")) {
    r.known_keys(hook, "semantic_hook", {"kind", "command", "timeout_ms"});
    const auto kind_name = r.get_or<std::string>(hook, "kind", "semantic_hook", "fixture-tests");
    if (auto k = semantic_hook_from_string(kind_name)) {
      c.semantic_hook.kind = *k;
    } else {
      r.fail("semantic_hook.kind", "must be fixture-tests, declared-guarantee or external");
    }
    c.semantic_hook.command = r.strings(hook, "command", "semantic_hook");
    c.semantic_hook.timeout =
        std::chrono::milliseconds(r.get_or<std::int64_t>(hook, "timeout_ms", "semantic_hook", 60000));
    switch (c.semantic_hook.kind) {
      case SemanticHookKind::kFixtureTests:
        if (!tests || tests->empty()) {
          r.fail("tests", "required when semantic_hook.kind is fixture-tests");
        } else {
          c.semantic_hook.tests = *tests;
        }
        if (c.language_tag != pysub::kLanguageTag) {
          r.fail("semantic_hook.kind", "fixture-tests only runs python-subset programs");
        }
        break;
      case SemanticHookKind::kExternal:
        if (c.semantic_hook.command.empty()) {
          r.fail("semantic_hook.command", "required when semantic_hook.kind is external");
        }
        break;
      case SemanticHookKind::kDeclaredGuarantee:
        break;
    }
  }

  // Cross-field rules.
  auto each_detector = [&](auto&& f) {
    f(c.primary, std::string("detectors.primary"));
    for (std::size_t i = 0; i < c.ensemble.size(); ++i) {
      f(c.ensemble[i], "detectors.ensemble[" + std::to_string(i) + "]");
    }
  };
  if (c.mode == CampaignMode::kSimulated) {
    each_detector([&](const DetectorSpec& d, const std::string& at) {
      if (d.kind == DetectorKind::kRemote) r.fail(join(at, "kind"), "simulated mode forbids remote detectors");
    });
    if (c.generator.remote) r.fail("generator.backend", "simulated mode forbids a remote generator");
  } else if (c.mode == CampaignMode::kRemote) {
    each_detector([&](const DetectorSpec& d, const std::string& at) {
      if (d.kind == DetectorKind::kSimulated) {
        r.fail(join(at, "kind"), "remote mode forbids simulated detectors");
      }
    });
    if (!c.generator.remote) r.fail("generator.backend", "remote mode requires a remote generator");
  }
  if (!c.generator.remote && c.language_tag != pysub::kLanguageTag) {
    r.fail("language_tag", "the simulated generator only transforms python-subset programs");
  }

  result.violations = std::move(r.violations);
  if (result.violations.empty()) result.config = std::move(c);
  return result;
}

CampaignConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override) {
  const auto text = read_file(path);
  if (!text) throw ConfigError(path.string() + ": cannot read config");
  json doc;
  try {
    doc = json::parse(*text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": not valid JSON: " + e.what());
  }
  auto result = parse_config(doc, seed_override);
  if (!result.config) {
    std::string msg = path.string() + ": invalid config";
    for (const auto& v : result.violations) msg += "\n  " + v.str();
    throw ConfigError(msg);
  }
  return *result.config;
}

namespace {

json detector_to_json(const DetectorSpec& d) {
  json j = {{"id", d.detector_id},
            {"kind", std::string(to_string(d.kind))},
            {"temperature", d.temperature},
            {"max_rounds", d.max_rounds},
            {"timeout_ms", d.timeout.count()},
            {"max_retries", d.max_retries},
            {"api_key_env", d.api_key_env}};
  if (d.endpoint) j["endpoint"] = *d.endpoint;
  if (d.model_name) j["model_name"] = *d.model_name;
  if (d.blind_spots) {
    json rules = json::array();
    for (const auto& r : d.blind_spots->base_rules) {
      rules.push_back({{"pattern", r.pattern}, {"score", r.score}, {"vuln_type", r.vuln_type}});
    }
    j["blind_spots"] = {{"rules", rules},
                        {"indirection_blindness_depth", d.blind_spots->indirection_blindness_depth},
                        {"type_confusion_prob", d.blind_spots->type_confusion_prob},
                        {"score_jitter_prob", d.blind_spots->score_jitter_prob},
                        {"seed", d.blind_spots->seed}};
  }
  return j;
}

}  // namespace

json config_to_json(const CampaignConfig& c) {
  json ensemble = json::array();
  for (const auto& d : c.ensemble) ensemble.push_back(detector_to_json(d));
  json adapters = json::array();
  for (const auto& a : c.adapters) {
    if (a.builtin) {
      adapters.push_back({{"type", "builtin"}});
    } else {
      adapters.push_back({{"type", "external"},
                          {"id", a.external.adapter_id},
                          {"command", a.external.command},
                          {"args", a.external.args},
                          {"parser", a.external.findings_parser},
                          {"file_suffix", a.external.file_suffix},
                          {"timeout_ms", a.external.timeout.count()}});
    }
  }
  json generator = {{"backend", c.generator.remote ? "remote" : "simulated"},
                    {"temperature", c.generator.temperature},
                    {"timeout_ms", c.generator.timeout.count()},
                    {"max_retries", c.generator.max_retries}};
  if (!c.generator.endpoint.empty()) generator["endpoint"] = c.generator.endpoint;
  if (!c.generator.model_name.empty()) generator["model_name"] = c.generator.model_name;
  if (!c.generator.api_key_env.empty()) generator["api_key_env"] = c.generator.api_key_env;
  json hook = {{"kind", std::string(to_string(c.semantic_hook.kind))},
               {"timeout_ms", c.semantic_hook.timeout.count()}};
  if (!c.semantic_hook.command.empty()) hook["command"] = c.semantic_hook.command;
  json j = {{"label", c.vuln_label},
            {"original_code", c.original_code},
            {"language_tag", c.language_tag},
            {"mode", std::string(to_string(c.mode))},
            {"budget_cycles", c.budget_cycles},
            {"width_k", c.width_k},
            {"k_rounds", c.k_rounds},
            {"threshold_n", c.threshold_n},
            {"rng_seed", c.rng_seed},
            {"max_depth", c.max_depth},
            {"max_active", c.max_active},
            {"detectors", {{"primary", detector_to_json(c.primary)}, {"ensemble", ensemble}}},
            {"adapters", adapters},
            {"generator", generator},
            {"semantic_hook", hook},
            {"parallel", c.parallel}};
  if (!c.semantic_hook.tests.empty()) j["tests"] = c.semantic_hook.tests;
  if (!c.library_path.empty()) j["library_path"] = c.library_path;
  return j;
}

}  // namespace lineage
