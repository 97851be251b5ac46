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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lineage/random.hpp"

namespace lineage {

using NodeId = std::uint64_t;
using CandidateId = std::uint64_t;

enum class NodeStatus { kActive, kPassed, kPruned, kFailed };

std::string_view to_string(NodeStatus status);
NodeStatus node_status_from_string(std::string_view s);

/// Upper bound of the aggregate potential: four component scores in [0, 1].
inline constexpr double kMaxPotential = 4.0;

/// One transformation sequence in the tree. The root holds the original
/// program and an empty action sequence; every other node holds the actions
/// applied on top of its parent's program.
struct StrategyNode {
  NodeId node_id = 0;
  std::optional<NodeId> parent_id;
  std::vector<std::string> action_seq;
  CandidateId candidate_id = 0;
  std::vector<double> observations;
  double posterior_alpha = 1.0;
  double posterior_beta = 1.0;
  NodeStatus status = NodeStatus::kActive;
  std::uint32_t fail_count = 0;

  bool operator==(const StrategyNode&) const = default;
};

/// Dynamically expanding tree of transformation sequences with Thompson
/// sampling over a Beta posterior per node.
///
/// Single writer. Const members may be called concurrently with each other.
class StrategyTree {
 public:
  explicit StrategyTree(std::uint64_t rng_seed = 0) : rng_seed_(rng_seed) {}

  /// Inserts the root for the original program. Throws StructuralError if a
  /// root already exists.
  NodeId add_root(CandidateId original);

  /// Adds a child of `parent` produced by `actions`. The new node starts
  /// active with a (1, 1) prior.
  NodeId add_node(NodeId parent, std::vector<std::string> actions, CandidateId candidate);

  bool contains(NodeId id) const { return nodes_.count(id) != 0; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  std::optional<NodeId> root_id() const { return root_; }
  std::uint64_t rng_seed() const { return rng_seed_; }
  const StrategyNode& node(NodeId id) const;
  const std::map<NodeId, StrategyNode>& nodes() const { return nodes_; }
  const std::vector<NodeId>& children(NodeId id) const;
  std::optional<NodeId> node_for_candidate(CandidateId c) const;

  /// Root-to-node path, inclusive, root first.
  std::vector<NodeId> lineage(NodeId id) const;
  std::size_t depth(NodeId id) const { return lineage(id).size() - 1; }

  /// The node and all of its descendants, ascending by id.
  std::vector<NodeId> clade(NodeId id) const;

  /// Appends phi and applies the fractional Beta update
  /// alpha += phi / 4, beta += 1 - phi / 4.
  const StrategyNode& record_observation(NodeId id, double phi);

  /// Largest observation anywhere in the clade, or 0 when the clade has no
  /// observations.
  double clade_potential(NodeId id) const;

  /// Draws Beta(alpha, beta) for every active node (ascending id) and returns
  /// the argmax; ties keep the lower id. Throws ExhaustedError when no node
  /// is active.
  NodeId sample_node(Rng& rng) const;

  /// Counts one failed expansion. When the count first exceeds threshold_n
  /// the node becomes failed and its action sequence is returned for the
  /// failed-policy list; later calls return nothing.
  std::optional<std::vector<std::string>> prune_and_flag(NodeId id, std::uint32_t threshold_n);

  void set_status(NodeId id, NodeStatus status);
  std::vector<NodeId> active_nodes() const;

  /// One JSON object per line, ascending node_id.
  std::string to_jsonl() const;
  static StrategyTree from_jsonl(std::string_view text, std::uint64_t rng_seed);

  bool operator==(const StrategyTree& other) const { return nodes_ == other.nodes_; }

 private:
  StrategyNode& mutable_node(NodeId id);
  void validate() const;

  std::uint64_t rng_seed_;
  std::optional<NodeId> root_;
  NodeId next_id_ = 0;
  std::map<NodeId, StrategyNode> nodes_;
  std::map<NodeId, std::vector<NodeId>> children_;
  std::set<CandidateId> candidates_;
};

}  // namespace lineage
