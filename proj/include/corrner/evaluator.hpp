// Copyright 2026 The Corrner Authors.
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

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "corrner/calibrator.hpp"
#include "corrner/config.hpp"
#include "corrner/experiment.hpp"
#include "corrner/metrics.hpp"
#include "corrner/stats.hpp"

namespace corrner {

enum class SweepAxis { kFraction, kDepth, kPool, kSamples };

std::string_view to_string(SweepAxis axis);
SweepAxis parse_axis(std::string_view name);

struct SweepPoint {
  double value = 0.0;
  // Method name -> one report per seed, in seed-list order.
  std::map<std::string, std::vector<EvalReport>> runs;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::kFraction;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> methods;  // always starts with the baseline
  std::vector<SweepPoint> points;    // axis order as requested
  std::string config_hash;

  // Per-seed micro F1 of a method at a point.
  std::vector<double> f1(std::size_t point, const std::string& method) const;
  // Paired comparison of a method against the baseline at a point.
  TTest versus_baseline(std::size_t point, const std::string& method) const;
  bool complete(std::size_t point) const;

  Json to_json() const;
  static SweepResult from_json(const Json& j);
};

EvalReport report_from_json(const Json& j);

struct SweepOptions {
  // Identifies the sweep for resuming; empty uses the runner's config hash.
  std::string config_hash;
  // Completed points from an earlier run with the same config hash are reused.
  const SweepResult* resume = nullptr;
  // Called after every finished point.
  std::function<void(const SweepResult&)> checkpoint;
  // Called after every (point, seed) run with the raw method runs.
  std::function<void(double value, std::uint64_t seed, const std::map<Method, MethodRun>&)>
      on_run;
};

SweepResult low_resource_sweep(Runner& runner, std::span<const double> fractions,
                               std::span<const Method> methods,
                               const SweepOptions& options = {});
SweepResult depth_sweep(Runner& runner, std::span<const std::size_t> ks,
                        const SweepOptions& options = {});
SweepResult pool_sweep(Runner& runner, std::span<const std::size_t> sizes,
                       std::span<const Method> methods, const SweepOptions& options = {});
SweepResult sample_count_sweep(Runner& runner, std::span<const int> counts,
                               const SweepOptions& options = {});

inline constexpr std::array<double, 6> kDefaultFractions{1.0, 0.5, 0.2, 0.1, 0.05, 0.03};

struct TimingRow {
  std::string method;
  std::size_t sentences = 0;
  double seconds = 0.0;
  double per_sentence_ms = 0.0;
  std::size_t pool_decodes = 0;  // pool documents actually tagged
};

// Wall-clock tagging time per method over `sentences`. Methods: "tag",
// "calibrate", "calibrate-nomemo", "correlator" (needs `correlated`).
std::vector<TimingRow> timing_report(const CrfModel& base, const CrfModel* correlated,
                                     const Index& index, std::span<const Sentence> sentences,
                                     const VotePolicy& policy,
                                     std::span<const std::string> methods);

Json timing_to_json(std::span<const TimingRow> rows);

}  // namespace corrner
