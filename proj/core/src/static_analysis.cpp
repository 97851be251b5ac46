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

#include "lineage/static_analysis.hpp"

#include <algorithm>
#include <cctype>

#include <nlohmann/json.hpp>

#include "lineage/error.hpp"
#include "lineage/subprocess.hpp"

namespace lineage {

using nlohmann::json;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<StaticFinding> parse_bandit(const std::string& analyzer_id, std::string_view output) {
  const json doc = json::parse(output, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw AdapterError("bandit output is not JSON", false);
  std::vector<StaticFinding> out;
  auto results = doc.find("results");
  if (results == doc.end()) return out;
  if (!results->is_array()) throw AdapterError("bandit results is not a list", false);
  for (const auto& r : *results) {
    StaticFinding f;
    f.analyzer_id = analyzer_id;
    f.rule_id = r.value("test_id", std::string());
    const std::string name = r.value("test_name", std::string());
    if (!name.empty()) f.rule_id += f.rule_id.empty() ? name : "/" + name;
    if (f.rule_id.empty()) throw AdapterError("bandit result without test_id", false);
    if (auto l = r.find("line_number"); l != r.end() && l->is_number_integer() && l->get<int>() > 0) {
      f.line = l->get<int>();
    }
    f.severity = severity_from_string(r.value("issue_severity", std::string("medium")))
                     .value_or(Severity::kMedium);
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<StaticFinding> parse_sarif(const std::string& analyzer_id, std::string_view output) {
  const json doc = json::parse(output, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw AdapterError("sarif output is not JSON", false);
  std::vector<StaticFinding> out;
  auto runs = doc.find("runs");
  if (runs == doc.end() || !runs->is_array()) throw AdapterError("sarif document has no runs", false);
  for (const auto& run : *runs) {
    auto results = run.find("results");
    if (results == run.end()) continue;
    for (const auto& r : *results) {
      StaticFinding f;
      f.analyzer_id = analyzer_id;
      f.rule_id = r.value("ruleId", std::string());
      if (f.rule_id.empty()) throw AdapterError("sarif result without ruleId", false);
      const std::string level = r.value("level", std::string("warning"));
      f.severity = level == "error" ? Severity::kHigh
                                    : (level == "note" || level == "none" ? Severity::kLow
                                                                          : Severity::kMedium);
      const json* region = nullptr;
      if (auto locs = r.find("locations"); locs != r.end() && locs->is_array() && !locs->empty()) {
        const auto& loc = (*locs)[0];
        if (loc.contains("physicalLocation") && loc["physicalLocation"].contains("region")) {
          region = &loc["physicalLocation"]["region"];
        }
      }
      if (region && region->contains("startLine") && (*region)["startLine"].is_number_integer()) {
        const int line = (*region)["startLine"].get<int>();
        if (line > 0) f.line = line;
      }
      out.push_back(std::move(f));
    }
  }
  return out;
}

std::vector<StaticFinding> parse_lines(const std::string& analyzer_id, std::string_view output) {
  std::vector<StaticFinding> out;
  std::size_t start = 0;
  while (start < output.size()) {
    auto nl = output.find('\n', start);
    if (nl == std::string_view::npos) nl = output.size();
    const std::string line = trim(output.substr(start, nl - start));
    start = nl + 1;
    if (line.empty()) continue;
    StaticFinding f;
    f.analyzer_id = analyzer_id;
    const auto c1 = line.find(':');
    f.rule_id = trim(line.substr(0, c1));
    if (f.rule_id.empty()) throw AdapterError("finding line without rule id: " + line, false);
    if (c1 != std::string::npos) {
      const auto c2 = line.find(':', c1 + 1);
      const std::string num = trim(line.substr(c1 + 1, c2 == std::string::npos ? std::string::npos : c2 - c1 - 1));
      if (!num.empty()) {
        if (!std::all_of(num.begin(), num.end(), [](unsigned char c) { return std::isdigit(c); }) ||
            num.size() > 7) {
          throw AdapterError("bad line number in finding: " + line, false);
        }
        if (const int n = std::stoi(num); n > 0) f.line = n;
      }
      if (c2 != std::string::npos) {
        auto sev = severity_from_string(trim(line.substr(c2 + 1)));
        if (!sev) throw AdapterError("bad severity in finding: " + line, false);
        f.severity = *sev;
      }
    }
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace

std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::kLow: return "low";
    case Severity::kMedium: return "medium";
    case Severity::kHigh: return "high";
  }
  return "medium";
}

std::optional<Severity> severity_from_string(std::string_view s) {
  const auto l = lower(s);
  if (l == "low") return Severity::kLow;
  if (l == "medium") return Severity::kMedium;
  if (l == "high") return Severity::kHigh;
  return std::nullopt;
}

const std::vector<StaticRule>& default_static_rules() {
  static const std::vector<StaticRule> kRules = {
      {"dangerous-call/pickle.loads", R"(\bpickle\s*\.\s*loads?\s*\()", Severity::kHigh},
      {"dangerous-call/yaml.load", R"(\byaml\s*\.\s*load\s*\()", Severity::kMedium},
      {"dangerous-call/os.system", R"(\bos\s*\.\s*system\s*\()", Severity::kHigh},
      {"dangerous-call/os.popen", R"(\bos\s*\.\s*popen\s*\()", Severity::kHigh},
      {"dangerous-call/subprocess", R"(\bsubprocess\s*\.\s*(call|run|check_output)\s*\()",
       Severity::kMedium},
      {"dangerous-call/eval", R"((^|[^.\w])eval\s*\()", Severity::kHigh},
      {"dangerous-call/exec", R"((^|[^.\w])exec\s*\()", Severity::kHigh},
      {"dangerous-call/hashlib.md5", R"(\bhashlib\s*\.\s*md5\s*\()", Severity::kMedium},
      {"dangerous-call/hashlib.sha1", R"(\bhashlib\s*\.\s*sha1\s*\()", Severity::kLow},
      {"dangerous-call/ssl._create_unverified_context",
       R"(\bssl\s*\.\s*_create_unverified_context\s*\()", Severity::kHigh},
      {"dangerous-call/ssl.wrap_socket", R"(\bssl\s*\.\s*wrap_socket\s*\()", Severity::kMedium},
      {"dangerous-call/paramiko.AutoAddPolicy", R"(\bparamiko\s*\.\s*AutoAddPolicy\b)",
       Severity::kHigh},
      {"dangerous-call/jinja2.Template", R"(\bjinja2\s*\.\s*Template\s*\()", Severity::kMedium},
      {"dangerous-call/dsa.generate", R"(\bdsa\s*\.\s*generate\s*\()", Severity::kMedium},
      {"dangerous-literal/bind-all-interfaces", R"(["']0\.0\.0\.0["'])", Severity::kMedium},
      {"dangerous-literal/debug-enabled", R"(["']debug["']\s*:\s*True\b)", Severity::kLow},
  };
  return kRules;
}

BuiltinPatternAdapter::BuiltinPatternAdapter(std::string id, std::vector<StaticRule> rules)
    : StaticAdapter(std::move(id)) {
  for (auto& r : rules) {
    std::regex re(r.regex, std::regex::ECMAScript | std::regex::optimize);
    rules_.emplace_back(std::move(r), std::move(re));
  }
}

std::vector<StaticFinding> BuiltinPatternAdapter::analyze(std::string_view code) {
  std::vector<StaticFinding> out;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= code.size()) {
    auto nl = code.find('\n', start);
    if (nl == std::string_view::npos) nl = code.size();
    const std::string line(code.substr(start, nl - start));
    ++line_no;
    for (const auto& [rule, re] : rules_) {
      if (std::regex_search(line, re)) out.push_back({id(), rule.rule_id, line_no, rule.severity});
    }
    if (nl == code.size()) break;
    start = nl + 1;
  }
  return out;
}

const std::vector<std::string>& findings_parsers() {
  static const std::vector<std::string> kNames = {"bandit-json", "sarif", "lines"};
  return kNames;
}

std::vector<StaticFinding> parse_findings(std::string_view parser, const std::string& analyzer_id,
                                          std::string_view output) {
  if (parser == "bandit-json") return parse_bandit(analyzer_id, output);
  if (parser == "sarif") return parse_sarif(analyzer_id, output);
  if (parser == "lines") return parse_lines(analyzer_id, output);
  throw AdapterError("unknown findings parser: " + std::string(parser), true);
}

ExternalAdapter::ExternalAdapter(ExternalAdapterSpec spec)
    : StaticAdapter(spec.adapter_id), spec_(std::move(spec)) {
  const auto& names = findings_parsers();
  if (std::find(names.begin(), names.end(), spec_.findings_parser) == names.end()) {
    throw AdapterError("unknown findings parser: " + spec_.findings_parser, true);
  }
}

std::vector<StaticFinding> ExternalAdapter::analyze(std::string_view code) {
  TempFile file(code, spec_.file_suffix);
  std::vector<std::string> argv = {spec_.command};
  for (auto arg : spec_.args) {
    for (auto pos = arg.find("{file}"); pos != std::string::npos; pos = arg.find("{file}", pos)) {
      arg.replace(pos, 6, file.path());
      pos += file.path().size();
    }
    argv.push_back(std::move(arg));
  }
  const ProcessResult r = run_process(argv, spec_.timeout);
  if (!r.launched) throw AdapterError(id() + ": cannot run " + spec_.command, true);
  if (r.timed_out) throw AdapterError(id() + ": timed out", true);
  if (trim(r.out).empty()) {
    if (r.exit_code != 0) {
      throw AdapterError(id() + ": exited with " + std::to_string(r.exit_code) + " and no output: " +
                             trim(r.err).substr(0, 200),
                         true);
    }
    return {};
  }
  return parse_findings(spec_.findings_parser, id(), r.out);
}

void AdapterRegistry::add(std::unique_ptr<StaticAdapter> adapter) {
  if (contains(adapter->id())) throw AdapterError("duplicate adapter id: " + adapter->id(), true);
  adapters_.push_back(std::move(adapter));
}

bool AdapterRegistry::contains(std::string_view id) const {
  return std::any_of(adapters_.begin(), adapters_.end(), [&](const auto& a) { return a->id() == id; });
}

std::vector<std::string> AdapterRegistry::ids() const {
  std::vector<std::string> out;
  for (const auto& a : adapters_) out.push_back(a->id());
  return out;
}

std::vector<StaticFinding> AdapterRegistry::analyze_static(std::string_view adapter_id,
                                                           std::string_view code) {
  for (const auto& a : adapters_) {
    if (a->id() == adapter_id) return a->analyze(code);
  }
  throw AdapterError("adapter not registered: " + std::string(adapter_id), true);
}

}  // namespace lineage
