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

#include "lineage/candidate.hpp"

#include <algorithm>

namespace lineage {

std::string describe(const ReflectionDigest& digest) {
  std::string out;
  out += "Flagged lines:";
  if (digest.flagged_lines.empty()) out += " none";
  for (int l : digest.flagged_lines) out += " " + std::to_string(l);
  out += "\nFlagged features:";
  if (digest.flagged_features.empty()) out += " none";
  for (const auto& f : digest.flagged_features) out += " `" + f + "`";
  out += "\nReasoning:\n";
  if (digest.reasoning_excerpts.empty()) out += "- none\n";
  for (const auto& r : digest.reasoning_excerpts) out += "- " + r + "\n";
  return out;
}

std::vector<std::string> cited_tokens(const std::string& text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto open = text.find('`', pos);
    if (open == std::string::npos) break;
    const auto close = text.find('`', open + 1);
    if (close == std::string::npos) break;
    std::string token = text.substr(open + 1, close - open - 1);
    if (!token.empty() && std::find(out.begin(), out.end(), token) == out.end()) {
      out.push_back(std::move(token));
    }
    pos = close + 1;
  }
  return out;
}

}  // namespace lineage
