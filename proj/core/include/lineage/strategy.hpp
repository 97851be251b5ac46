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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lineage {

enum class StrategyCategory { kLayout, kControlFlow, kDataFlow };

std::string_view to_string(StrategyCategory c);
/// Accepts "layout", "control_flow" / "control-flow", "data_flow" /
/// "data-flow", case-insensitively.
std::optional<StrategyCategory> category_from_string(std::string_view s);

enum class StrategySource { kSeedLibrary, kReflectionLearned };

std::string_view to_string(StrategySource s);
std::optional<StrategySource> source_from_string(std::string_view s);

struct StrategyDescriptor {
  std::string strategy_id;
  StrategyCategory category = StrategyCategory::kLayout;
  std::string description;
  StrategySource source = StrategySource::kSeedLibrary;
  std::uint32_t fail_count = 0;
  bool retired = false;

  bool operator==(const StrategyDescriptor&) const = default;
};

/// What a detector pointed at when it cited a token of the program.
enum class FeatureKind { kIdentifier, kCall, kLiteral };

/// Classifies a cited token: quoted text is a literal, anything with a dot
/// or a parenthesis is a call, the rest are identifiers.
FeatureKind classify_feature(std::string_view feature);

/// The category whose strategies claim to hide features of this kind.
StrategyCategory category_for(FeatureKind kind);

}  // namespace lineage
