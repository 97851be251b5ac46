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

// Prompt templates for the remote detector, planner, reflector and
// synthesizer, and their renderers. Placeholders are written {name}.

#include <string>
#include <string_view>
#include <vector>

#include "lineage/strategy.hpp"

namespace lineage::prompts {

extern const std::string_view kDetectorTemplate;
extern const std::string_view kPlanningTemplate;
extern const std::string_view kReflectionTemplate;
extern const std::string_view kSynthesisTemplate;

/// Preamble prepended to the detector prompt on paraphrased rounds.
extern const std::string_view kParaphrasePreamble;

/// Replaces every occurrence of {name}. Substituted text is not rescanned.
std::string fill(std::string_view tmpl, const std::vector<std::pair<std::string, std::string>>& values);

std::string detector_prompt(std::string_view code, bool paraphrase);

/// The strategy library as shown to the planner: usable strategies first,
/// then a failed_policy section listing every retired strategy and every
/// failed lineage.
std::string policy_section(const std::vector<StrategyDescriptor>& library,
                           const std::vector<std::vector<std::string>>& failed_lineages);

std::string planning_prompt(std::string_view current_code, std::string_view detector_feedback,
                            std::string_view policy);

std::string reflection_prompt(std::string_view verify_result, std::string_view obfuscation_strategy,
                              std::string_view original_code, std::string_view code);

std::string synthesis_prompt(std::string_view code, std::string_view plan_json, int variant);

}  // namespace lineage::prompts
