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

#include "lineage/scenarios.hpp"

#include "lineage/fixtures.hpp"
#include "lineage/random.hpp"

namespace lineage {

namespace {

constexpr int kUnreachableDepth = 64;

DetectorSpec simulated(std::string id, const DetectionRule& rule, int blindness, Rng& rng) {
  DetectorSpec d;
  d.detector_id = std::move(id);
  BlindSpotConfig b;
  b.base_rules = {rule};
  b.indirection_blindness_depth = blindness;
  b.score_jitter_prob = 0.05 + 0.10 * rng.uniform();
  b.type_confusion_prob = 0.10 + 0.30 * rng.uniform();
  b.seed = rng.next_u64();
  d.blind_spots = b;
  return d;
}

}  // namespace

CampaignConfig make_scenario(ScenarioKind kind, std::uint32_t index, std::uint64_t seed) {
  const auto& fixtures = fixture_programs();
  const auto& fx = fixtures[index % fixtures.size()];
  const bool reachable = kind == ScenarioKind::kReachable;
  Rng rng(derive_seed(seed, {reachable ? 1u : 2u, index}));

  CampaignConfig c;
  c.vuln_label = fx.label;
  c.original_code = fx.code;
  c.semantic_hook.kind = SemanticHookKind::kFixtureTests;
  c.semantic_hook.tests = fx.tests;
  c.adapters = {AdapterSpec{}};
  c.rng_seed = rng.next_u64();
  c.width_k = 3;
  c.k_rounds = 3;
  c.threshold_n = 3;
  c.budget_cycles = reachable ? 12 : 40;

  auto depth = [&](int lo, int hi) { return lo + static_cast<int>(rng.below(hi - lo + 1)); };
  c.primary = simulated("primary", fx.rule, reachable ? depth(1, 2) : kUnreachableDepth, rng);
  // Two ensemble members share the primary's kind of blind spot; the third
  // may see further, so the vote is won by majority rather than unanimity.
  c.ensemble.push_back(simulated("ensemble-a", fx.rule, reachable ? depth(1, 2) : kUnreachableDepth, rng));
  c.ensemble.push_back(simulated("ensemble-b", fx.rule, reachable ? depth(1, 2) : kUnreachableDepth, rng));
  c.ensemble.push_back(simulated("ensemble-c", fx.rule, reachable ? depth(1, 4) : kUnreachableDepth, rng));
  return c;
}

}  // namespace lineage
