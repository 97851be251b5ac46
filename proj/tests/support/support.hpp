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

// Helpers shared by the unit tests and the acceptance binary.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lineage/config.hpp"
#include "lineage/error.hpp"
#include "lineage/fixtures.hpp"
#include "lineage/transport.hpp"

namespace lineage::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    const auto base = std::filesystem::temp_directory_path();
    for (;;) {
      path_ = base / ("lineage-test-" + std::to_string(rd()) + std::to_string(rd()));
      if (std::filesystem::create_directory(path_)) break;
    }
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& contents) {
  std::ofstream out(p, std::ios::binary);
  out << contents;
}

/// Scripted chat transport. Replies come from `respond`, or are popped from
/// `replies` in order (the last one repeats).
class FakeTransport : public ChatTransport {
 public:
  FakeTransport() = default;
  explicit FakeTransport(std::vector<std::string> replies) : replies_(std::move(replies)) {}
  explicit FakeTransport(std::function<std::string(const ChatRequest&)> respond)
      : respond_(std::move(respond)) {}

  std::string complete(const ChatRequest& request) override {
    std::lock_guard lock(mu_);
    requests_.push_back(request);
    if (respond_) return respond_(request);
    if (replies_.empty()) throw TransportError("no scripted reply");
    const auto i = std::min(next_, replies_.size() - 1);
    ++next_;
    return replies_[i];
  }

  std::vector<ChatRequest> requests() const {
    std::lock_guard lock(mu_);
    return requests_;
  }

 private:
  mutable std::mutex mu_;
  std::vector<std::string> replies_;
  std::size_t next_ = 0;
  std::function<std::string(const ChatRequest&)> respond_;
  std::vector<ChatRequest> requests_;
};

/// A transport that always fails, standing in for a dead endpoint.
class DeadTransport : public ChatTransport {
 public:
  std::string complete(const ChatRequest&) override {
    ++calls;
    throw TransportError("connection refused");
  }
  std::atomic<int> calls{0};
};

/// Simulated config for one bundled fixture with every detector blind at
/// `blind_depth` and no noise.
inline CampaignConfig fixture_config(const std::string& label, int blind_depth,
                                     std::uint64_t seed = 11) {
  const FixtureProgram* f = find_fixture(label);
  if (!f) throw std::runtime_error("unknown fixture " + label);
  CampaignConfig c;
  c.vuln_label = f->label;
  c.original_code = f->code;
  c.rng_seed = seed;
  c.budget_cycles = 12;
  auto detector = [&](const std::string& id, int depth) {
    DetectorSpec d;
    d.detector_id = id;
    d.kind = DetectorKind::kSimulated;
    BlindSpotConfig b;
    b.base_rules = {f->rule};
    b.indirection_blindness_depth = depth;
    b.seed = derive_seed(seed, {hash_string(id)});
    d.blind_spots = b;
    return d;
  };
  c.primary = detector("primary", blind_depth);
  c.ensemble = {detector("ensemble-a", blind_depth), detector("ensemble-b", blind_depth),
                detector("ensemble-c", blind_depth)};
  c.adapters = {AdapterSpec{}};
  c.semantic_hook.kind = SemanticHookKind::kFixtureTests;
  c.semantic_hook.tests = f->tests;
  return c;
}

}  // namespace lineage::testing
