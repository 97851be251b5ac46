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

#include <string>
#include <vector>

#include "lineage/checkpoint.hpp"

namespace lineage {

enum class ReportFormat { kTable, kCsv };

/// A campaign row, or an error for a checkpoint that could not be read.
struct ReportRow {
  std::string source;  // checkpoint directory
  std::optional<CampaignReport> report;
  std::string error;
};

/// "7 | 2→5 | TRUE": cycles, initial→final score, pass.
std::string score_cells(const CampaignReport& r);

/// Header plus one line per row. Table columns are separated by " | ",
/// csv columns by commas with fields quoted when needed.
std::string render_report(const std::vector<ReportRow>& rows, ReportFormat format);

}  // namespace lineage
