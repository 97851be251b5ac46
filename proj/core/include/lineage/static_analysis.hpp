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

#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

namespace lineage {

enum class Severity { kLow, kMedium, kHigh };

std::string_view to_string(Severity s);
std::optional<Severity> severity_from_string(std::string_view s);

struct StaticFinding {
  std::string analyzer_id;
  std::string rule_id;
  std::optional<int> line;
  Severity severity = Severity::kMedium;

  bool operator==(const StaticFinding&) const = default;
};

class StaticAdapter {
 public:
  explicit StaticAdapter(std::string id) : id_(std::move(id)) {}
  virtual ~StaticAdapter() = default;
  const std::string& id() const { return id_; }
  /// Empty result means the code evaded this analyzer. Throws AdapterError
  /// when the analyzer could not produce a verdict.
  virtual std::vector<StaticFinding> analyze(std::string_view code) = 0;

 private:
  std::string id_;
};

struct StaticRule {
  std::string rule_id;  // "dangerous-call/pickle.loads"
  std::string regex;
  Severity severity = Severity::kMedium;
};

/// Dangerous-call and dangerous-literal table used by the in-process adapter.
const std::vector<StaticRule>& default_static_rules();

inline constexpr std::string_view kBuiltinAdapterId = "builtin-patterns";

/// Line-by-line regex matcher over the raw source text.
class BuiltinPatternAdapter : public StaticAdapter {
 public:
  explicit BuiltinPatternAdapter(std::string id = std::string(kBuiltinAdapterId),
                                 std::vector<StaticRule> rules = default_static_rules());
  std::vector<StaticFinding> analyze(std::string_view code) override;

 private:
  std::vector<std::pair<StaticRule, std::regex>> rules_;
};

struct ExternalAdapterSpec {
  std::string adapter_id;
  std::string command;
  std::vector<std::string> args;  // "{file}" is replaced by the temp file path
  std::string findings_parser;    // "bandit-json", "sarif" or "lines"
  std::string file_suffix = ".py";
  std::chrono::milliseconds timeout{60000};

  bool operator==(const ExternalAdapterSpec&) const = default;
};

/// Names accepted by parse_findings.
const std::vector<std::string>& findings_parsers();

/// Parses analyzer output.
///   bandit-json: {"results": [{"test_id", "test_name", "line_number", "issue_severity"}]}
///   sarif:       runs[].results[] with ruleId, level and the first location's startLine
///   lines:       one finding per nonblank line, "rule_id[:line[:severity]]"
/// Throws AdapterError(tool_failed = false) on malformed output.
std::vector<StaticFinding> parse_findings(std::string_view parser, const std::string& analyzer_id,
                                          std::string_view output);

class ExternalAdapter : public StaticAdapter {
 public:
  explicit ExternalAdapter(ExternalAdapterSpec spec);
  std::vector<StaticFinding> analyze(std::string_view code) override;

 private:
  ExternalAdapterSpec spec_;
};

/// Adapters by id, in registration order.
class AdapterRegistry {
 public:
  void add(std::unique_ptr<StaticAdapter> adapter);
  bool contains(std::string_view id) const;
  std::vector<std::string> ids() const;
  std::size_t size() const { return adapters_.size(); }
  /// Throws AdapterError(tool_failed = true) for an unknown id.
  std::vector<StaticFinding> analyze_static(std::string_view adapter_id, std::string_view code);

 private:
  std::vector<std::unique_ptr<StaticAdapter>> adapters_;
};

}  // namespace lineage
