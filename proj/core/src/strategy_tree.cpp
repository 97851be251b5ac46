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

#include "lineage/strategy_tree.hpp"

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lineage/error.hpp"

namespace lineage {

namespace {

const std::vector<NodeId> kNoChildren;

}  // namespace

std::string_view to_string(NodeStatus status) {
  switch (status) {
    case NodeStatus::kActive: return "active";
    case NodeStatus::kPassed: return "passed";
    case NodeStatus::kPruned: return "pruned";
    case NodeStatus::kFailed: return "failed";
  }
  return "active";
}

NodeStatus node_status_from_string(std::string_view s) {
  if (s == "active") return NodeStatus::kActive;
  if (s == "passed") return NodeStatus::kPassed;
  if (s == "pruned") return NodeStatus::kPruned;
  if (s == "failed") return NodeStatus::kFailed;
  throw StructuralError("unknown node status '" + std::string(s) + "'");
}

NodeId StrategyTree::add_root(CandidateId original) {
  if (root_) throw StructuralError("tree already has a root");
  if (candidates_.count(original)) throw StructuralError("duplicate candidate id");
  StrategyNode n;
  n.node_id = next_id_++;
  n.candidate_id = original;
  root_ = n.node_id;
  candidates_.insert(original);
  children_[n.node_id];
  nodes_.emplace(n.node_id, std::move(n));
  return *root_;
}

NodeId StrategyTree::add_node(NodeId parent, std::vector<std::string> actions,
                              CandidateId candidate) {
  if (!contains(parent)) {
    throw StructuralError("unknown parent node " + std::to_string(parent));
  }
  if (actions.empty()) throw StructuralError("a child node needs at least one action");
  if (candidates_.count(candidate)) {
    throw StructuralError("duplicate candidate id " + std::to_string(candidate));
  }
  StrategyNode n;
  n.node_id = next_id_++;
  n.parent_id = parent;
  n.action_seq = std::move(actions);
  n.candidate_id = candidate;
  const NodeId id = n.node_id;
  candidates_.insert(candidate);
  children_[parent].push_back(id);
  children_[id];
  nodes_.emplace(id, std::move(n));
  return id;
}

const StrategyNode& StrategyTree::node(NodeId id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw StructuralError("unknown node " + std::to_string(id));
  return it->second;
}

StrategyNode& StrategyTree::mutable_node(NodeId id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw StructuralError("unknown node " + std::to_string(id));
  return it->second;
}

const std::vector<NodeId>& StrategyTree::children(NodeId id) const {
  node(id);
  auto it = children_.find(id);
  return it == children_.end() ? kNoChildren : it->second;
}

std::optional<NodeId> StrategyTree::node_for_candidate(CandidateId c) const {
  for (const auto& [id, n] : nodes_) {
    if (n.candidate_id == c) return id;
  }
  return std::nullopt;
}

std::vector<NodeId> StrategyTree::lineage(NodeId id) const {
  std::vector<NodeId> path;
  const StrategyNode* cur = &node(id);
  path.push_back(cur->node_id);
  while (cur->parent_id) {
    cur = &node(*cur->parent_id);
    path.push_back(cur->node_id);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<NodeId> StrategyTree::clade(NodeId id) const {
  node(id);
  std::vector<NodeId> out;
  std::vector<NodeId> stack{id};
  while (!stack.empty()) {
    const NodeId cur = stack.back();
    stack.pop_back();
    out.push_back(cur);
    for (NodeId c : children(cur)) stack.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

const StrategyNode& StrategyTree::record_observation(NodeId id, double phi) {
  if (!(phi >= 0.0 && phi <= kMaxPotential)) {
    std::ostringstream msg;
    msg << "potential " << phi << " outside [0, 4]";
    throw ValidationError(msg.str());
  }
  StrategyNode& n = mutable_node(id);
  n.observations.push_back(phi);
  const double reward = phi / kMaxPotential;
  n.posterior_alpha += reward;
  n.posterior_beta += 1.0 - reward;
  return n;
}

double StrategyTree::clade_potential(NodeId id) const {
  double best = 0.0;
  for (NodeId c : clade(id)) {
    for (double phi : nodes_.at(c).observations) best = std::max(best, phi);
  }
  return best;
}

NodeId StrategyTree::sample_node(Rng& rng) const {
  std::optional<NodeId> best;
  double best_draw = -1.0;
  for (const auto& [id, n] : nodes_) {
    if (n.status != NodeStatus::kActive) continue;
    const double draw = rng.beta(n.posterior_alpha, n.posterior_beta);
    if (draw > best_draw) {
      best_draw = draw;
      best = id;
    }
  }
  if (!best) throw ExhaustedError("no active node left in the strategy tree");
  return *best;
}

std::optional<std::vector<std::string>> StrategyTree::prune_and_flag(NodeId id,
                                                                     std::uint32_t threshold_n) {
  StrategyNode& n = mutable_node(id);
  ++n.fail_count;
  if (n.status == NodeStatus::kActive && n.fail_count > threshold_n) {
    n.status = NodeStatus::kFailed;
    return n.action_seq;
  }
  return std::nullopt;
}

void StrategyTree::set_status(NodeId id, NodeStatus status) {
  mutable_node(id).status = status;
}

std::vector<NodeId> StrategyTree::active_nodes() const {
  std::vector<NodeId> out;
  for (const auto& [id, n] : nodes_) {
    if (n.status == NodeStatus::kActive) out.push_back(id);
  }
  return out;
}

std::string StrategyTree::to_jsonl() const {
  std::string out;
  for (const auto& [id, n] : nodes_) {
    nlohmann::json j;
    j["node_id"] = n.node_id;
    j["parent_id"] = n.parent_id ? nlohmann::json(*n.parent_id) : nlohmann::json(nullptr);
    j["action_seq"] = n.action_seq;
    j["candidate_id"] = n.candidate_id;
    j["observations"] = n.observations;
    j["posterior_alpha"] = n.posterior_alpha;
    j["posterior_beta"] = n.posterior_beta;
    j["status"] = std::string(to_string(n.status));
    j["fail_count"] = n.fail_count;
    out += j.dump();
    out += '\n';
  }
  return out;
}

StrategyTree StrategyTree::from_jsonl(std::string_view text, std::uint64_t rng_seed) {
  StrategyTree tree(rng_seed);
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    StrategyNode n;
    try {
      const auto j = nlohmann::json::parse(line);
      n.node_id = j.at("node_id").get<NodeId>();
      if (!j.at("parent_id").is_null()) n.parent_id = j.at("parent_id").get<NodeId>();
      n.action_seq = j.at("action_seq").get<std::vector<std::string>>();
      n.candidate_id = j.at("candidate_id").get<CandidateId>();
      n.observations = j.at("observations").get<std::vector<double>>();
      n.posterior_alpha = j.at("posterior_alpha").get<double>();
      n.posterior_beta = j.at("posterior_beta").get<double>();
      n.status = node_status_from_string(j.at("status").get<std::string>());
      n.fail_count = j.at("fail_count").get<std::uint32_t>();
    } catch (const nlohmann::json::exception& e) {
      throw StructuralError("tree line " + std::to_string(lineno) + ": " + e.what());
    }
    if (tree.nodes_.count(n.node_id)) {
      throw StructuralError("duplicate node id " + std::to_string(n.node_id));
    }
    if (tree.candidates_.count(n.candidate_id)) {
      throw StructuralError("duplicate candidate id " + std::to_string(n.candidate_id));
    }
    tree.candidates_.insert(n.candidate_id);
    tree.next_id_ = std::max(tree.next_id_, n.node_id + 1);
    tree.nodes_.emplace(n.node_id, std::move(n));
  }
  for (const auto& [id, n] : tree.nodes_) {
    tree.children_[id];
    if (n.parent_id) {
      if (!tree.nodes_.count(*n.parent_id)) {
        throw StructuralError("node " + std::to_string(id) + " references missing parent " +
                              std::to_string(*n.parent_id));
      }
      tree.children_[*n.parent_id].push_back(id);
    } else {
      if (tree.root_) throw StructuralError("more than one root node");
      tree.root_ = id;
    }
  }
  for (auto& [id, kids] : tree.children_) std::sort(kids.begin(), kids.end());
  tree.validate();
  return tree;
}

void StrategyTree::validate() const {
  if (nodes_.empty()) return;
  if (!root_) throw StructuralError("tree has no root");
  // Every node must reach the root without revisiting a node.
  for (const auto& [id, n] : nodes_) {
    std::set<NodeId> seen{id};
    const StrategyNode* cur = &n;
    while (cur->parent_id) {
      if (!seen.insert(*cur->parent_id).second) {
        throw StructuralError("cycle through node " + std::to_string(id));
      }
      cur = &nodes_.at(*cur->parent_id);
    }
    if (cur->node_id != *root_) throw StructuralError("node not reachable from root");
    if (n.posterior_alpha < 1.0 || n.posterior_beta < 1.0) {
      throw StructuralError("posterior below the (1, 1) prior on node " + std::to_string(id));
    }
  }
}

}  // namespace lineage
