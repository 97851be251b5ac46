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

#include <cstddef>
#include <string>
#include <vector>

#include "lineage/strategy_tree.hpp"

namespace lineage {

struct TransformMeta {
  int indirection_depth = 0;
  std::vector<std::string> applied_strategies;  // cumulative, root first

  bool operator==(const TransformMeta&) const = default;
};

/// An obfuscated program variant. Candidate 0 is the original program.
struct Candidate {
  CandidateId candidate_id = 0;
  std::string code;
  NodeId origin_node = 0;  // node the candidate was expanded from
  TransformMeta transform_meta;
  std::string language_tag;
  // Index into applied_strategies of the first step added by this candidate's
  // own expansion; earlier entries were inherited from its parent.
  std::size_t step_begin = 0;

  bool operator==(const Candidate&) const = default;
};

/// What the verifier's detectors pointed at, reduced to what planning and
/// reflection need.
struct ReflectionDigest {
  std::vector<int> flagged_lines;
  std::vector<std::string> flagged_features;  // cited tokens, deduplicated
  std::vector<std::string> reasoning_excerpts;

  bool empty() const { return flagged_features.empty() && reasoning_excerpts.empty(); }
  bool operator==(const ReflectionDigest&) const = default;
};

/// Plain-text rendering used as {detector_feedback} and {verify_result}.
std::string describe(const ReflectionDigest& digest);

/// Backtick-quoted tokens in order of first appearance.
std::vector<std::string> cited_tokens(const std::string& text);

}  // namespace lineage
