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

// Bundled toy programs, one per vulnerability category, each with a test
// suite for the fixture-tests semantic hook and a detection rule for the
// simulated detector.

#include <string>
#include <string_view>
#include <vector>

#include "lineage/detectors.hpp"

namespace lineage {

struct FixtureProgram {
  std::string label;
  std::string code;
  std::string tests;
  DetectionRule rule;
};

const std::vector<FixtureProgram>& fixture_programs();
const FixtureProgram* find_fixture(std::string_view label);

}  // namespace lineage
