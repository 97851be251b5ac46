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

// Seeded simulated campaigns over the bundled fixtures.

#include <cstdint>

#include "lineage/config.hpp"

namespace lineage {

enum class ScenarioKind {
  kReachable,    // every detector's blind spot sits within two indirection steps
  kUnreachable,  // the primary detector sees through any depth the transformers reach
};

/// Scenario `index` of the given kind. Fixtures are taken in order, blind
/// spots and noise levels are drawn from derive_seed(seed, {kind, index}).
CampaignConfig make_scenario(ScenarioKind kind, std::uint32_t index, std::uint64_t seed = 0);

}  // namespace lineage
