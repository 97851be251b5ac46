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
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lineage/candidate.hpp"
#include "lineage/random.hpp"
#include "lineage/strategy.hpp"
#include "lineage/transport.hpp"

namespace lineage {

/// Ordered strategy descriptors. Order is planning priority.
class StrategyLibrary {
 public:
  StrategyLibrary() = default;
  explicit StrategyLibrary(std::vector<StrategyDescriptor> descriptors);

  /// The built-in transformers followed by remote-only descriptors.
  static StrategyLibrary seed();

  const std::vector<StrategyDescriptor>& descriptors() const { return descriptors_; }
  std::vector<StrategyDescriptor>& mutable_descriptors() { return descriptors_; }
  const StrategyDescriptor* find(std::string_view id) const;
  StrategyDescriptor* find(std::string_view id);
  std::size_t size() const { return descriptors_.size(); }
  std::size_t usable_count() const;
  /// True when a built-in transformer implements the strategy.
  static bool executable(std::string_view id);

  nlohmann::json to_json() const;
  static StrategyLibrary from_json(const nlohmann::json& j);

  bool operator==(const StrategyLibrary&) const = default;

 private:
  std::vector<StrategyDescriptor> descriptors_;
};

struct PlanStep {
  std::string op;
  std::string strategy_category;  // a strategy id from the library

  bool operator==(const PlanStep&) const = default;
};

struct ObfuscationPlan {
  std::vector<PlanStep> layout;
  std::vector<PlanStep> control_flow;
  std::vector<PlanStep> data_flow;

  bool empty() const { return layout.empty() && control_flow.empty() && data_flow.empty(); }
  /// Strategy ids in synthesis order: layout, control flow, data flow.
  std::vector<std::string> ordered_strategies() const;
  /// {"Layout": [...], "Control_Flow": [...], "Data_Flow": [...]}
  nlohmann::json to_json() const;

  bool operator==(const ObfuscationPlan&) const = default;
};

/// Parses a planner reply. Entries whose strategy_category does not name a
/// usable library strategy (matched case-insensitively) are dropped. Throws
/// FormatError when no object is found and GenerationError when nothing
/// usable remains.
ObfuscationPlan parse_plan(std::string_view raw, const StrategyLibrary& library);

class GeneratorBackend {
 public:
  virtual ~GeneratorBackend() = default;
  virtual ObfuscationPlan plan(std::string_view code, const ReflectionDigest& feedback,
                               const StrategyLibrary& library,
                               const std::vector<std::vector<std::string>>& failed_lineages) = 0;
  /// Up to width_k variant sources with the strategies each one applied.
  struct Variant {
    std::string code;
    std::vector<std::string> applied;
    int depth_increment = 0;
  };
  virtual std::vector<Variant> synthesize(std::string_view code, const ObfuscationPlan& plan,
                                          int width_k, std::uint64_t seed) = 0;
};

/// Rule-based planner and the built-in transformer set. For each category
/// with a cited feature, the first unretired applicable built-in of that
/// category joins the plan. With no cited feature at all, the first
/// applicable built-in is used. Throws GenerationError when features were
/// cited but nothing aimed at them applies.
class SimulatedGenerator : public GeneratorBackend {
 public:
  ObfuscationPlan plan(std::string_view code, const ReflectionDigest& feedback,
                       const StrategyLibrary& library,
                       const std::vector<std::vector<std::string>>& failed_lineages) override;
  std::vector<Variant> synthesize(std::string_view code, const ObfuscationPlan& plan, int width_k,
                                  std::uint64_t seed) override;
};

struct RemoteGeneratorOptions {
  std::string model_name;
  double temperature = 0.7;
  std::string language_tag;
};

/// Planning and synthesis prompts sent through a chat transport.
class RemoteGenerator : public GeneratorBackend {
 public:
  RemoteGenerator(std::shared_ptr<ChatTransport> transport, RemoteGeneratorOptions options);
  ObfuscationPlan plan(std::string_view code, const ReflectionDigest& feedback,
                       const StrategyLibrary& library,
                       const std::vector<std::vector<std::string>>& failed_lineages) override;
  std::vector<Variant> synthesize(std::string_view code, const ObfuscationPlan& plan, int width_k,
                                  std::uint64_t seed) override;

 private:
  std::shared_ptr<ChatTransport> transport_;
  RemoteGeneratorOptions options_;
};

/// Plans the next expansion. Throws GenerationError when the library has no
/// usable strategy.
ObfuscationPlan plan(std::string_view code, const ReflectionDigest& feedback,
                     const StrategyLibrary& library, GeneratorBackend& backend,
                     const std::vector<std::vector<std::string>>& failed_lineages = {});

/// Expands `parent` into up to width_k distinct candidates numbered from
/// first_id. Variants that fail to parse, repeat an earlier variant, or
/// equal the parent are dropped; if none survive a GenerationError lists
/// the reasons.
std::vector<Candidate> synthesize(const Candidate& parent, NodeId origin_node,
                                  const ObfuscationPlan& plan, int width_k,
                                  GeneratorBackend& backend, std::uint64_t seed,
                                  CandidateId first_id);

/// Pulls the program out of a synthesis reply: the first fenced block, or
/// the whole reply when there is none.
std::string extract_code_block(std::string_view reply);

}  // namespace lineage
