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

#include "lineage/report.hpp"

namespace lineage {

namespace {

constexpr const char* kArrow = "→";

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string score_cells(const CampaignReport& r) {
  return std::to_string(r.cycles_used) + " | " + std::to_string(r.initial_score) + kArrow +
         std::to_string(r.final_score) + " | " + (r.pass ? "TRUE" : "FALSE");
}

std::string render_report(const std::vector<ReportRow>& rows, ReportFormat format) {
  std::string out;
  if (format == ReportFormat::kCsv) {
    out = "vuln,cycles,score,pass\n";
    for (const auto& row : rows) {
      if (!row.report) {
        out += csv_field(row.source) + ",ERROR," + csv_field(row.error) + ",\n";
        continue;
      }
      const auto& r = *row.report;
      out += csv_field(r.vuln_label) + "," + std::to_string(r.cycles_used) + "," +
             std::to_string(r.initial_score) + kArrow + std::to_string(r.final_score) + "," +
             (r.pass ? "TRUE" : "FALSE") + "\n";
    }
    return out;
  }
  out = "vuln | cycles | score | pass\n";
  for (const auto& row : rows) {
    if (!row.report) {
      out += row.source + " | ERROR: " + row.error + "\n";
      continue;
    }
    out += row.report->vuln_label + " | " + score_cells(*row.report) + "\n";
  }
  return out;
}

}  // namespace lineage
