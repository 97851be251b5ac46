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

#include "lineage/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "lineage/error.hpp"

namespace lineage {

namespace {

void require_runs(std::span<const DetectionRun> runs, const char* what) {
  if (runs.empty()) throw ValidationError(std::string(what) + ": no detection runs");
  for (const auto& r : runs) {
    if (r.risk_score < kMinRiskScore || r.risk_score > kMaxRiskScore) {
      throw ValidationError(std::string(what) + ": risk score " + std::to_string(r.risk_score) +
                            " outside [1, 5]");
    }
  }
}

void require_one_model(std::span<const DetectionRun> runs, const char* what) {
  for (const auto& r : runs) {
    if (r.model_id != runs.front().model_id) {
      throw ValidationError(std::string(what) + ": runs from more than one model");
    }
  }
}

double mean_score(std::span<const DetectionRun> runs) {
  double sum = 0.0;
  for (const auto& r : runs) sum += r.risk_score;
  return sum / static_cast<double>(runs.size());
}

}  // namespace

std::string normalize_vuln_type(std::string_view raw) {
  std::size_t b = 0, e = raw.size();
  while (b < e && std::isspace(static_cast<unsigned char>(raw[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(raw[e - 1]))) --e;
  std::string out;
  out.reserve(e - b);
  for (std::size_t i = b; i < e; ++i) {
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(raw[i]))));
  }
  if (out == "n/a" || out == "na" || out == "none") return {};
  return out;
}

void normalize_run(DetectionRun& run) {
  if (run.risk_score < kMinRiskScore || run.risk_score > kMaxRiskScore) {
    throw ValidationError("risk score " + std::to_string(run.risk_score) + " outside [1, 5]");
  }
  std::vector<std::string> types;
  for (const auto& t : run.vuln_types) {
    auto n = normalize_vuln_type(t);
    if (!n.empty()) types.push_back(std::move(n));
  }
  if (run.risk_score == kMaxRiskScore) types.clear();
  run.vuln_types = std::move(types);
}

double evasion_score(std::span<const DetectionRun> runs) {
  require_runs(runs, "evasion_score");
  require_one_model(runs, "evasion_score");
  return (mean_score(runs) - 1.0) / 4.0;
}

Consistency self_consistency(std::span<const DetectionRun> runs) {
  require_runs(runs, "self_consistency");
  const double mu = mean_score(runs);
  double ss = 0.0;
  for (const auto& r : runs) ss += (r.risk_score - mu) * (r.risk_score - mu);
  const double sigma = std::sqrt(ss / static_cast<double>(runs.size()));
  const double dispersion = sigma / 2.0;
  Consistency c;
  c.sc = 1.0 - std::min(dispersion, 1.0);
  c.s_con = 1.0 - c.sc;
  return c;
}

double hallucination_score(std::span<const DetectionRun> runs) {
  require_runs(runs, "hallucination_score");
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& r : runs) {
    for (const auto& t : r.vuln_types) {
      auto n = normalize_vuln_type(t);
      if (n.empty()) continue;
      ++counts[n];
      ++total;
    }
  }
  if (counts.size() <= 1) return 0.0;
  double h = 0.0;
  for (const auto& [type, n] : counts) {
    const double p = static_cast<double>(n) / static_cast<double>(total);
    h -= p * std::log(p);
  }
  constexpr double kLambda = 1.0;
  return std::min(1.0, kLambda * h / std::log(static_cast<double>(counts.size())));
}

double transferability_score(const std::map<std::string, bool>& per_model_pass) {
  if (per_model_pass.empty()) throw ValidationError("transferability_score: no models");
  std::size_t passed = 0;
  for (const auto& [model, pass] : per_model_pass) passed += pass ? 1 : 0;
  return static_cast<double>(passed) / static_cast<double>(per_model_pass.size());
}

PotentialScore potential(const std::map<std::string, std::vector<DetectionRun>>& per_model_runs,
                         const std::map<std::string, bool>& per_model_pass) {
  if (per_model_runs.empty() || per_model_pass.empty()) {
    throw ValidationError("potential: empty model maps");
  }
  if (per_model_runs.size() != per_model_pass.size() ||
      !std::equal(per_model_runs.begin(), per_model_runs.end(), per_model_pass.begin(),
                  [](const auto& a, const auto& b) { return a.first == b.first; })) {
    throw ValidationError("potential: run and pass maps have different model keys");
  }
  return potential_with_transfer(per_model_runs, transferability_score(per_model_pass));
}

PotentialScore potential_with_transfer(
    const std::map<std::string, std::vector<DetectionRun>>& per_model_runs, double s_tr) {
  if (per_model_runs.empty()) throw ValidationError("potential: no models");
  if (!(s_tr >= 0.0 && s_tr <= 1.0)) throw ValidationError("potential: s_tr outside [0, 1]");
  PotentialScore out;
  for (const auto& [model, runs] : per_model_runs) {
    ComponentScores c;
    c.s_eva = evasion_score(runs);
    c.s_hal = hallucination_score(runs);
    c.s_con = self_consistency(runs).s_con;
    c.s_tr = s_tr;
    out.per_model.emplace(model, c);
  }
  const double m = static_cast<double>(out.per_model.size());
  for (const auto& [model, c] : out.per_model) {
    out.s_eva += c.s_eva / m;
    out.s_hal += c.s_hal / m;
    out.s_con += c.s_con / m;
    out.s_tr += c.s_tr / m;
    out.phi += c.sum() / m;
  }
  return out;
}

bool pass_verdict(std::span<const DetectionRun> runs) {
  require_runs(runs, "pass_verdict");
  std::size_t fives = 0;
  for (const auto& r : runs) fives += r.risk_score == kMaxRiskScore ? 1 : 0;
  return 2 * fives > runs.size();
}

int majority_score(std::span<const DetectionRun> runs) {
  require_runs(runs, "majority_score");
  std::vector<int> s;
  s.reserve(runs.size());
  for (const auto& r : runs) s.push_back(r.risk_score);
  std::sort(s.begin(), s.end());
  return s[(s.size() - 1) / 2];
}

}  // namespace lineage
