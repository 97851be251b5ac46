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

// Built-in semantic-preserving rewrites over the Python subset. Each one is
// total: when it finds nothing to rewrite it returns the module unchanged
// and reports applied = false.

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "lineage/pysub.hpp"
#include "lineage/random.hpp"
#include "lineage/strategy.hpp"

namespace lineage {

struct TransformResult {
  pysub::Module module;
  bool applied = false;
};

struct BuiltinTransform {
  std::string id;
  StrategyCategory category;
  int depth_increment;
  std::string description;
  std::function<TransformResult(const pysub::Module&, Rng&)> apply;
  // Restructures the statements around a sink, so a detector that still
  // pins the sink's line has seen through it.
  bool reshapes_statements = false;
};

/// All built-in transformers in seed-library priority order.
const std::vector<BuiltinTransform>& builtin_transforms();
const BuiltinTransform* find_builtin(std::string_view id);

TransformResult identifier_rename(const pysub::Module& m, Rng& rng);
TransformResult dead_branch_insertion(const pysub::Module& m, Rng& rng);
TransformResult dynamic_attribute_indirection(const pysub::Module& m, Rng& rng);
TransformResult call_table_dispatch(const pysub::Module& m, Rng& rng);
TransformResult opaque_predicate_wrap(const pysub::Module& m, Rng& rng);
TransformResult string_split_and_join(const pysub::Module& m, Rng& rng);

/// Every identifier that occurs in the module: names, parameters,
/// definitions, imports, loop variables and attributes.
std::vector<std::string> identifiers(const pysub::Module& m);

}  // namespace lineage
