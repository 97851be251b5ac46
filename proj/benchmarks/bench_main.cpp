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

#include <benchmark/benchmark.h>

#include "lineage/fixtures.hpp"
#include "lineage/interpreter.hpp"
#include "lineage/orchestrator.hpp"
#include "lineage/pysub.hpp"
#include "lineage/scenarios.hpp"
#include "lineage/scoring.hpp"
#include "lineage/strategy_tree.hpp"
#include "lineage/transforms.hpp"

namespace lineage {
namespace {

std::vector<DetectionRun> random_runs(std::size_t n, Rng& rng) {
  static const char* kTypes[] = {"xss", "rce", "sql-injection", "ssrf"};
  std::vector<DetectionRun> runs(n);
  for (auto& r : runs) {
    r.model_id = "m";
    r.risk_score = 1 + static_cast<int>(rng.below(5));
    if (r.risk_score < 5) r.vuln_types = {kTypes[rng.below(4)]};
  }
  return runs;
}

void BM_ScoreRunSet(benchmark::State& state) {
  Rng rng(1);
  const auto runs = random_runs(static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(evasion_score(runs));
    benchmark::DoNotOptimize(self_consistency(runs));
    benchmark::DoNotOptimize(hallucination_score(runs));
  }
}
BENCHMARK(BM_ScoreRunSet)->Arg(3)->Arg(15)->Arg(101);

void BM_ThompsonSample(benchmark::State& state) {
  StrategyTree t;
  t.add_root(0);
  Rng build(2);
  for (CandidateId c = 1; c < static_cast<CandidateId>(state.range(0)); ++c) {
    const auto id = t.add_node(static_cast<NodeId>(build.below(t.size())), {"s"}, c);
    t.record_observation(id, 4.0 * build.uniform());
  }
  Rng rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(t.sample_node(rng));
}
BENCHMARK(BM_ThompsonSample)->Arg(16)->Arg(64)->Arg(256);

void BM_ApplyTransform(benchmark::State& state) {
  const auto& t = builtin_transforms()[static_cast<std::size_t>(state.range(0))];
  const auto module = pysub::parse(find_fixture("avoid-pickle")->code);
  Rng rng(4);
  for (auto _ : state) benchmark::DoNotOptimize(pysub::print(t.apply(module, rng).module));
  state.SetLabel(t.id);
}
BENCHMARK(BM_ApplyTransform)->DenseRange(0, 5);

void BM_FixtureSuite(benchmark::State& state) {
  const auto* f = find_fixture("avoid-pickle");
  for (auto _ : state) benchmark::DoNotOptimize(pysub::run_test_suite(f->code, f->tests));
}
BENCHMARK(BM_FixtureSuite);

void BM_SimulatedCampaign(benchmark::State& state) {
  const auto kind = state.range(0) == 0 ? ScenarioKind::kReachable : ScenarioKind::kUnreachable;
  const auto cfg = make_scenario(kind, 0, 0);
  for (auto _ : state) benchmark::DoNotOptimize(run_campaign(cfg));
  state.SetLabel(kind == ScenarioKind::kReachable ? "reachable" : "unreachable");
}
BENCHMARK(BM_SimulatedCampaign)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace lineage

BENCHMARK_MAIN();
