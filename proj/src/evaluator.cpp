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

#include "corrner/evaluator.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <thread>

#include "corrner/correlator.hpp"
#include "corrner/error.hpp"
#include "corrner/parallel.hpp"
#include "corrner/pool_tagger.hpp"

namespace corrner {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Prf prf_from_json(const Json& j) {
  return {j.at("precision").get<double>(), j.at("recall").get<double>(),
          j.at("f1").get<double>()};
}

TypeCounts counts_from_json(const Json& j) {
  TypeCounts c;
  c.gold = j.at("gold").get<std::size_t>();
  c.pred = j.at("pred").get<std::size_t>();
  c.correct = j.at("correct").get<std::size_t>();
  c.prf = prf_from_json(j);
  return c;
}

// Runs a sweep with the seed loop outermost so the cached baseline model of a
// seed is reused across axis points that share its training fraction.
class SweepDriver {
 public:
  SweepDriver(Runner& runner, SweepAxis axis, std::vector<double> values,
              std::vector<Method> methods, const SweepOptions& options)
      : runner_(runner), options_(options), methods_(std::move(methods)) {
    if (values.empty()) throw ConfigError("sweep needs at least one axis value");
    result_.axis = axis;
    result_.seeds = runner.config().seeds;
    result_.config_hash =
        options.config_hash.empty() ? runner.config_hash() : options.config_hash;
    if (methods_.empty() || methods_.front() != Method::kBaseline) {
      std::erase(methods_, Method::kBaseline);
      methods_.insert(methods_.begin(), Method::kBaseline);
    }
    for (Method m : methods_) result_.methods.emplace_back(to_string(m));
    for (double v : values) result_.points.push_back({v, {}});
    if (options.resume && options.resume->config_hash == result_.config_hash &&
        options.resume->axis == axis) {
      resume_ = options.resume;
    }
  }

  template <typename MakeSpec>
  SweepResult run(MakeSpec make_spec) {
    for (std::uint64_t seed : result_.seeds) {
      for (std::size_t p = 0; p < result_.points.size(); ++p) {
        SweepPoint& point = result_.points[p];
        if (reuse(point, seed)) continue;
        const auto runs = runner_.run(make_spec(point.value, seed), methods_);
        for (const auto& [m, r] : runs) point.runs[std::string(to_string(m))].push_back(r.report);
        if (options_.on_run) options_.on_run(point.value, seed, runs);
        if (options_.checkpoint) options_.checkpoint(result_);
      }
    }
    return std::move(result_);
  }

 private:
  bool reuse(SweepPoint& point, std::uint64_t seed) const {
    if (!resume_) return false;
    std::map<std::string, EvalReport> found;
    for (const auto& old : resume_->points) {
      if (old.value != point.value) continue;
      for (const auto& name : result_.methods) {
        auto it = old.runs.find(name);
        if (it == old.runs.end()) continue;
        for (const auto& report : it->second) {
          if (report.metadata.value("seed", std::uint64_t{0}) == seed) found[name] = report;
        }
      }
    }
    if (found.size() != result_.methods.size()) return false;
    for (auto& [name, report] : found) point.runs[name].push_back(std::move(report));
    return true;
  }

  Runner& runner_;
  const SweepOptions& options_;
  std::vector<Method> methods_;
  const SweepResult* resume_ = nullptr;
  SweepResult result_;
};

template <typename T>
std::vector<double> as_doubles(std::span<const T> xs) {
  return {xs.begin(), xs.end()};
}

template <typename Fn>
double seconds(Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kFraction: return "fraction";
    case SweepAxis::kDepth: return "k";
    case SweepAxis::kPool: return "pool";
    case SweepAxis::kSamples: return "samples";
  }
  return "?";
}

SweepAxis parse_axis(std::string_view name) {
  if (name == "fraction") return SweepAxis::kFraction;
  if (name == "k" || name == "depth") return SweepAxis::kDepth;
  if (name == "pool") return SweepAxis::kPool;
  if (name == "samples") return SweepAxis::kSamples;
  throw ConfigError("unknown sweep axis '" + std::string(name) +
                    "' (expected fraction, k, pool or samples)");
}

std::vector<double> SweepResult::f1(std::size_t point, const std::string& method) const {
  std::vector<double> out;
  const auto& runs = points.at(point).runs;
  auto it = runs.find(method);
  if (it == runs.end()) return out;
  for (const auto& r : it->second) out.push_back(r.micro().f1);
  return out;
}

TTest SweepResult::versus_baseline(std::size_t point, const std::string& method) const {
  const auto a = f1(point, method);
  const auto b = f1(point, "baseline");
  if (a.size() != b.size() || a.size() < 2) {
    return {kNaN, kNaN, kNaN, a.size() == b.size() && !a.empty() ? mean(a) - mean(b) : kNaN};
  }
  return paired_ttest(a, b);
}

bool SweepResult::complete(std::size_t point) const {
  for (const auto& m : methods) {
    if (f1(point, m).size() != seeds.size()) return false;
  }
  return true;
}

Json SweepResult::to_json() const {
  Json pts = Json::array();
  for (std::size_t p = 0; p < points.size(); ++p) {
    Json runs = Json::object();
    Json summary = Json::object();
    for (const auto& m : methods) {
      auto it = points[p].runs.find(m);
      if (it == points[p].runs.end()) continue;
      Json reports = Json::array();
      for (const auto& r : it->second) reports.push_back(corrner::to_json(r));
      runs[m] = std::move(reports);
      const auto f = f1(p, m);
      Json s = {{"f1", f},
                {"mean_f1", number_or_null(f.empty() ? kNaN : mean(f))},
                {"stddev_f1", number_or_null(f.size() < 2 ? kNaN : stddev(f))}};
      if (m != "baseline") {
        const TTest t = versus_baseline(p, m);
        s["delta_vs_baseline"] = number_or_null(t.mean_diff);
        s["t"] = number_or_null(t.t);
        s["p_value"] = number_or_null(t.p);
      }
      summary[m] = std::move(s);
    }
    pts.push_back({{"value", points[p].value},
                   {"complete", complete(p)},
                   {"summary", std::move(summary)},
                   {"runs", std::move(runs)}});
  }
  return {{"axis", to_string(axis)}, {"seeds", seeds},          {"methods", methods},
          {"config_hash", config_hash}, {"tool_version", kToolVersion}, {"points", pts}};
}

EvalReport report_from_json(const Json& j) {
  EvalReport r;
  for (const auto& [type, c] : j.at("per_type").items()) r.per_type[type] = counts_from_json(c);
  const Json& micro = j.at("micro");
  r.total = counts_from_json(micro);
  r.macro = prf_from_json(j.at("macro"));
  if (j.contains("metadata")) r.metadata = j.at("metadata");
  return r;
}

SweepResult SweepResult::from_json(const Json& j) {
  try {
    SweepResult r;
    r.axis = parse_axis(j.at("axis").get<std::string>());
    r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    r.methods = j.at("methods").get<std::vector<std::string>>();
    r.config_hash = j.at("config_hash").get<std::string>();
    for (const auto& p : j.at("points")) {
      SweepPoint point;
      point.value = p.at("value").get<double>();
      for (const auto& [m, reports] : p.at("runs").items()) {
        for (const auto& rep : reports) point.runs[m].push_back(report_from_json(rep));
      }
      r.points.push_back(std::move(point));
    }
    return r;
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed sweep result: ") + e.what());
  }
}

SweepResult low_resource_sweep(Runner& runner, std::span<const double> fractions,
                               std::span<const Method> methods, const SweepOptions& options) {
  for (double f : fractions) runner.subsample(f, runner.config().seeds.front());
  SweepDriver driver(runner, SweepAxis::kFraction, as_doubles(fractions),
                     {methods.begin(), methods.end()}, options);
  return driver.run([](double value, std::uint64_t seed) {
    RunSpec spec;
    spec.fraction = value;
    spec.seed = seed;
    return spec;
  });
}

SweepResult depth_sweep(Runner& runner, std::span<const std::size_t> ks,
                        const SweepOptions& options) {
  SweepDriver driver(runner, SweepAxis::kDepth, as_doubles(ks),
                     {Method::kBaseline, Method::kVoting}, options);
  return driver.run([](double value, std::uint64_t seed) {
    RunSpec spec;
    spec.seed = seed;
    spec.k = static_cast<std::size_t>(value);
    return spec;
  });
}

SweepResult pool_sweep(Runner& runner, std::span<const std::size_t> sizes,
                       std::span<const Method> methods, const SweepOptions& options) {
  SweepDriver driver(runner, SweepAxis::kPool, as_doubles(sizes),
                     {methods.begin(), methods.end()}, options);
  return driver.run([](double value, std::uint64_t seed) {
    RunSpec spec;
    spec.seed = seed;
    spec.pool_size = static_cast<std::size_t>(value);
    return spec;
  });
}

SweepResult sample_count_sweep(Runner& runner, std::span<const int> counts,
                               const SweepOptions& options) {
  for (int c : counts) {
    if (c < 0) throw ConfigError("max_samples must be >= 0");
  }
  SweepDriver driver(runner, SweepAxis::kSamples, as_doubles(counts),
                     {Method::kBaseline, Method::kCorrelator}, options);
  return driver.run([](double value, std::uint64_t seed) {
    RunSpec spec;
    spec.seed = seed;
    spec.max_samples = static_cast<int>(value);
    return spec;
  });
}

std::vector<TimingRow> timing_report(const CrfModel& base, const CrfModel* correlated,
                                     const Index& index, std::span<const Sentence> sentences,
                                     const VotePolicy& policy,
                                     std::span<const std::string> methods) {
  std::vector<TimingRow> rows;
  for (const auto& method : methods) {
    TimingRow row;
    row.method = method;
    row.sentences = sentences.size();
    if (method == "tag") {
      row.seconds = seconds([&] { (void)tag(base, sentences); });
    } else if (method == "calibrate" || method == "calibrate-nomemo") {
      VotePolicy p = policy;
      p.memoize = method == "calibrate";
      const PoolTagger pool(base, index, p.memoize);
      row.seconds = seconds([&] {
        for (const auto& s : sentences) (void)calibrate(pool, s, p);
      });
      row.pool_decodes = pool.tagged_count();
    } else if (method == "correlator") {
      if (correlated == nullptr) throw ConfigError("timing 'correlator' needs a correlated model");
      row.seconds = seconds([&] { (void)tag_with_correlation(*correlated, &index, sentences); });
    } else {
      throw ConfigError("unknown timing method '" + method + "'");
    }
    row.per_sentence_ms =
        sentences.empty() ? 0.0 : 1000.0 * row.seconds / static_cast<double>(sentences.size());
    rows.push_back(std::move(row));
  }
  return rows;
}

Json timing_to_json(std::span<const TimingRow> rows) {
  Json out = Json::array();
  for (const auto& r : rows) {
    out.push_back({{"method", r.method},
                   {"sentences", r.sentences},
                   {"seconds", r.seconds},
                   {"per_sentence_ms", r.per_sentence_ms},
                   {"pool_decodes", r.pool_decodes}});
  }
  return {{"rows", out},
          {"hardware", {{"threads", thread_limit()},
                        {"hardware_concurrency", std::thread::hardware_concurrency()}}},
          {"tool_version", kToolVersion}};
}

}  // namespace corrner
