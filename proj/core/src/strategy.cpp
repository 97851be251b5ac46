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

#include "lineage/strategy.hpp"

#include <algorithm>
#include <cctype>

namespace lineage {

namespace {

std::string fold(std::string_view s) {
  std::string out;
  for (char c : s) {
    const char l = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    out.push_back(l == '-' ? '_' : l);
  }
  return out;
}

}  // namespace

std::string_view to_string(StrategyCategory c) {
  switch (c) {
    case StrategyCategory::kLayout: return "layout";
    case StrategyCategory::kControlFlow: return "control_flow";
    case StrategyCategory::kDataFlow: return "data_flow";
  }
  return "layout";
}

std::optional<StrategyCategory> category_from_string(std::string_view s) {
  const std::string f = fold(s);
  if (f == "layout") return StrategyCategory::kLayout;
  if (f == "control_flow") return StrategyCategory::kControlFlow;
  if (f == "data_flow") return StrategyCategory::kDataFlow;
  return std::nullopt;
}

std::string_view to_string(StrategySource s) {
  return s == StrategySource::kSeedLibrary ? "seed_library" : "reflection_learned";
}

std::optional<StrategySource> source_from_string(std::string_view s) {
  if (s == "seed_library") return StrategySource::kSeedLibrary;
  if (s == "reflection_learned") return StrategySource::kReflectionLearned;
  return std::nullopt;
}

FeatureKind classify_feature(std::string_view feature) {
  if (!feature.empty() && (feature.front() == '"' || feature.front() == '\'')) {
    return FeatureKind::kLiteral;
  }
  if (feature.find('.') != std::string_view::npos || feature.find('(') != std::string_view::npos) {
    return FeatureKind::kCall;
  }
  return FeatureKind::kIdentifier;
}

StrategyCategory category_for(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kIdentifier: return StrategyCategory::kLayout;
    case FeatureKind::kCall: return StrategyCategory::kControlFlow;
    case FeatureKind::kLiteral: return StrategyCategory::kDataFlow;
  }
  return StrategyCategory::kLayout;
}

}  // namespace lineage
