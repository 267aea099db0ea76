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

// Acceptance suite. Prints one PASS/FAIL line per criterion; exits non-zero
// when any fails. Optional arguments select criteria by number.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "corrner/calibrator.hpp"
#include "corrner/corpus.hpp"
#include "corrner/crf_dp.hpp"
#include "corrner/evaluator.hpp"
#include "corrner/experiment.hpp"
#include "corrner/metrics.hpp"
#include "corrner/retriever.hpp"
#include "corrner/synthgen.hpp"
#include "test_support.hpp"

namespace corrner {
namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail << "first failure: " << what << "; ";
    pass = pass && ok;
  }
};

double elapsed(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ------------------------------------------------------------ 1

void crf_oracle(Outcome& o) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  double worst = 0.0;
  int cases = 0;
  for (; cases < 400; ++cases) {
    const auto c = testing::random_chain(rng, 6, 4, cases % 2 == 1);
    const auto e = testing::enumerate_chain(c.emissions, c.chain);
    const auto best = crf::viterbi(c.emissions, c.chain);
    const double dz = std::abs(crf::log_partition(c.emissions, c.chain) - e.log_z);
    const double ds = std::abs(best.score - e.best_score);
    worst = std::max({worst, dz, ds});
    o.require(dz <= 1e-8 && ds <= 1e-8, "score mismatch in case " + std::to_string(cases));
    o.require(best.path == e.best_path, "argmax mismatch in case " + std::to_string(cases));
  }
  const double secs = elapsed(t0);
  o.require(secs < 10.0, "runtime");
  o.detail << cases << " instances, max |diff| " << worst << ", " << secs << " s";
}

// ------------------------------------------------------------ 2

void gradient_check(Outcome& o) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(202);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    auto c = testing::random_gradient_case(rng);
    worst = std::max(worst, testing::gradient_relative_error(c));
  }
  const double secs = elapsed(t0);
  o.require(worst <= 1e-4, "relative error");
  o.require(secs < 60.0, "runtime");
  o.detail << "50 cases, max relative error " << worst << ", " << secs << " s";
}

// ------------------------------------------------------------ 3

void bm25_oracle(Outcome& o) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(303);
  std::vector<std::string> docs;
  for (int i = 0; i < 2000; ++i) docs.push_back(testing::random_text(rng, 1, 14));
  const Index idx = build_index(docs);
  const testing::Bm25Oracle oracle(docs, 1.2, 0.75);
  double worst = 0.0;
  for (int q = 0; q < 100; ++q) {
    const std::string query = testing::random_text(rng, 1, 6);
    const std::size_t k = 1 + rng() % 60;
    const auto got = retrieve_topk(idx, query, k).hits;
    const auto want = oracle.topk(query, k);
    o.require(got.size() == want.size(), "hit count for query " + std::to_string(q));
    for (std::size_t i = 0; i < std::min(got.size(), want.size()); ++i) {
      o.require(got[i].doc_id == want[i].doc, "order for query " + std::to_string(q));
      worst = std::max(worst, std::abs(got[i].score - want[i].score));
    }
  }
  o.require(worst <= 1e-9, "score tolerance");
  const double worked = bm25_score(build_index(std::vector<std::string>{"a b a"}), std::vector<std::string>{"a"}, 0);
  o.require(std::abs(worked - 0.3956) <= 1e-4, "worked example");
  const double secs = elapsed(t0);
  o.require(secs < 10.0, "runtime");
  o.detail << "2000 docs x 100 queries, max |score diff| " << worst << ", worked example "
           << worked << ", " << secs << " s";
}

// ------------------------------------------------------------ 4

void spans_and_metrics(Outcome& o) {
  std::mt19937_64 rng(404);
  const std::vector<std::string> types{"PROV", "CITY", "DISTRICT", "TOWN", "POI"};
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + rng() % 24;
    const auto spans = testing::random_spans(rng, n, types);
    for (TagScheme scheme : {TagScheme::kBIO, TagScheme::kBIOES}) {
      const auto tags = encode_tags(spans, n, scheme);
      o.require(decode_spans(tags, scheme, DecodeMode::kStrict) == spans,
                "round trip case " + std::to_string(i));
      o.require(encode_tags(decode_spans(tags, scheme, DecodeMode::kStrict), n, scheme) == tags,
                "re-encode case " + std::to_string(i));
    }
  }
  int fixtures = 0;
  for (const auto& f : testing::metric_fixtures()) {
    const EvalReport r = entity_prf(f.gold, f.pred);
    const bool ok = r.micro().precision == f.micro_p && r.micro().recall == f.micro_r &&
                    r.micro().f1 == f.micro_f1 && r.macro.precision == f.macro_p &&
                    r.macro.recall == f.macro_r && r.macro.f1 == f.macro_f1;
    o.require(ok, "fixture " + f.name);
    ++fixtures;
  }
  o.detail << "1000 fuzzed span sets x 2 schemes, " << fixtures << " metric fixtures";
}

// ------------------------------------------------------------ 5

void calibration_invariants(Outcome& o) {
  std::mt19937_64 rng(505);
  const std::vector<std::string> types{"PROV", "CITY", "DISTRICT"};
  int unanimous = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto c = testing::random_vote_case(rng, types);
    const std::string id = "case " + std::to_string(i);
    for (SurfaceMatch match : {SurfaceMatch::kExact, SurfaceMatch::kPrefixExtension}) {
      VotePolicy p;
      p.match = match;
      p.include_self_vote = false;
      const auto out = vote_types(c.predicted, c.neighbors, p);
      o.require(out.size() == c.predicted.size(), id + " span count");
      for (std::size_t k = 0; k < std::min(out.size(), c.predicted.size()); ++k) {
        o.require(out[k].start == c.predicted[k].start && out[k].end == c.predicted[k].end &&
                      out[k].surface == c.predicted[k].surface,
                  id + " boundary");
        const auto tally = testing::brute_tally(c.predicted[k], c.neighbors, match);
        if (tally.size() == 1) {
          ++unanimous;
          o.require(out[k].type == tally.begin()->first, id + " unanimity");
        }
      }
      o.require(vote_types(out, c.neighbors, p) == out, id + " idempotence");
      o.require(vote_types(c.predicted, std::vector<Neighbor>{}, p) == c.predicted,
                id + " K=0 identity");
    }
  }
  o.detail << "1000 cases x 2 match modes, " << unanimous << " unanimous spans checked";
}

// ------------------------------------------------------------ benchmark

struct Bench {
  std::unique_ptr<Runner> runner;
  std::optional<SweepResult> fractions;
  double setup_seconds = 0.0;
  double sweep_seconds = 0.0;
};

Bench& bench() {
  static Bench b;
  if (!b.runner) {
    const auto t0 = Clock::now();
    const GenConfig g;
    const SyntheticCorpus s = generate_corpus(generate_gazetteer(g), g);
    b.runner = std::make_unique<Runner>(BenchmarkData{s.labels, s.train, s.dev, s.test, s.pool},
                                        benchmark_defaults());
    b.setup_seconds = elapsed(t0);
  }
  return b;
}

const SweepResult& fraction_sweep() {
  Bench& b = bench();
  if (!b.fractions) {
    const auto t0 = Clock::now();
    const std::array<Method, 3> methods{Method::kBaseline, Method::kVoting,
                                        Method::kCorrelator};
    SweepOptions opts;
    opts.on_run = [](double value, std::uint64_t seed, const std::map<Method, MethodRun>& runs) {
      std::fprintf(stderr, "  fraction %.2f seed %llu:", value,
                   static_cast<unsigned long long>(seed));
      for (const auto& [m, r] : runs) {
        std::fprintf(stderr, " %s %.4f", std::string(to_string(m)).c_str(), r.report.micro().f1);
      }
      std::fprintf(stderr, "\n");
    };
    b.fractions = low_resource_sweep(*b.runner, kDefaultFractions, methods, opts);
    b.sweep_seconds = elapsed(t0);
  }
  return *b.fractions;
}

std::size_t point_of(const SweepResult& s, double value) {
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    if (s.points[i].value == value) return i;
  }
  throw std::logic_error("missing sweep point");
}

double mean_of(const std::vector<double>& v) { return mean(v); }

// ------------------------------------------------------------ 6

void headline(Outcome& o) {
  const SweepResult& s = fraction_sweep();
  const std::size_t p = point_of(s, 1.0);
  const double base = mean_of(s.f1(p, "baseline"));
  const double vote = mean_of(s.f1(p, "voting"));
  const double corr = mean_of(s.f1(p, "correlator"));
  const TTest t = s.versus_baseline(p, "voting");
  o.require(s.seeds.size() == 8, "8 seeds");
  o.require(vote > base, "voting mean above baseline");
  o.require(t.p < 0.05, "voting p < 0.05");
  o.require(corr >= vote, "correlator mean at least voting");
  const GenConfig g;
  o.require(g.n_pool >= 100000 && g.suffix_drop_rate == 0.4 && g.ambiguity_rate == 0.25,
            "default generator config");
  o.detail << "mean micro-F1 baseline " << base << ", voting " << vote << " (p " << t.p
           << "), correlator " << corr << " (p " << s.versus_baseline(p, "correlator").p
           << "); data " << bench().setup_seconds << " s, sweep " << bench().sweep_seconds
           << " s (all fractions)";
}

// ------------------------------------------------------------ 7

void low_resource(Outcome& o) {
  const SweepResult& s = fraction_sweep();
  std::cout << "  fraction  baseline  d(voting)  p        d(correlator)  p\n";
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    const TTest v = s.versus_baseline(i, "voting");
    const TTest c = s.versus_baseline(i, "correlator");
    std::printf("  %-8.2f  %.4f    %+.4f    %.4f   %+.4f        %.4f\n", s.points[i].value,
                mean_of(s.f1(i, "baseline")), v.mean_diff, v.p, c.mean_diff, c.p);
  }
  const std::size_t p = point_of(s, 0.05);
  const TTest v = s.versus_baseline(p, "voting");
  const TTest c = s.versus_baseline(p, "correlator");
  o.require(v.mean_diff > 0 && v.p < 0.05, "voting at 0.05");
  o.require(c.mean_diff > 0 && c.p < 0.05, "correlator at 0.05");
  o.detail << "fraction 0.05: voting " << std::showpos << v.mean_diff << std::noshowpos << " (p "
           << v.p << "), correlator " << std::showpos << c.mean_diff << std::noshowpos << " (p "
           << c.p << ")";
}

// ------------------------------------------------------------ 8

void null_safety(Outcome& o) {
  Runner& r = *bench().runner;
  int compared = 0;
  auto check = [&](const char* what) {
    return [&o, &compared, what](double, std::uint64_t seed,
                                 const std::map<Method, MethodRun>& runs) {
      const auto& base = runs.at(Method::kBaseline);
      for (const auto& [m, run] : runs) {
        if (m == Method::kBaseline) continue;
        o.require(run.tags == base.tags && run.report.micro().f1 == base.report.micro().f1 &&
                      run.report.macro.f1 == base.report.macro.f1,
                  std::string(what) + " " + std::string(to_string(m)) + " seed " +
                      std::to_string(seed));
        ++compared;
      }
    };
  };
  SweepOptions samples_opts;
  samples_opts.on_run = check("max_samples=0");
  const std::array<int, 1> zero_samples{0};
  sample_count_sweep(r, zero_samples, samples_opts);

  SweepOptions pool_opts;
  pool_opts.on_run = check("pool=0");
  const std::array<std::size_t, 1> zero_pool{0};
  const std::array<Method, 3> methods{Method::kBaseline, Method::kVoting, Method::kCorrelator};
  pool_sweep(r, zero_pool, methods, pool_opts);
  o.require(compared == 24, "comparison count");
  o.detail << compared << " (method, seed) runs identical to the baseline";
}

// ------------------------------------------------------------ 9

void timing(Outcome& o) {
  Runner& r = *bench().runner;
  const auto model = r.baseline(1.0, 1);
  const auto index = r.index(std::nullopt);
  VotePolicy policy = r.config().vote;
  policy.k = 50;

  std::vector<Sentence> plain;
  for (std::size_t i = 0; i < 200; ++i) plain.push_back(r.data().test[i].sentence);
  const std::vector<std::string> two{"tag", "calibrate"};
  const auto rows = timing_report(*model, nullptr, *index, plain, policy, two);
  o.require(rows[1].per_sentence_ms > rows[0].per_sentence_ms, "calibrate slower than tag");

  // Duplicate-heavy pool: 5000 distinct pool texts, each indexed 4 times.
  std::vector<std::string> texts;
  for (int rep = 0; rep < 4; ++rep) {
    texts.insert(texts.end(), r.data().pool.begin(), r.data().pool.begin() + 5000);
  }
  const Index dup_index = build_index(texts, r.config().index);
  const std::vector<std::string> memo{"calibrate", "calibrate-nomemo"};
  const auto mrows = timing_report(*model, nullptr, dup_index, plain, policy, memo);
  o.require(mrows[0].seconds < mrows[1].seconds, "memoized calibrate faster");
  o.require(mrows[0].pool_decodes < mrows[1].pool_decodes, "memoized decodes fewer");

  std::cout << "  method            sentences  per-sentence ms  pool decodes\n";
  for (const auto* set : {&rows, &mrows}) {
    for (const auto& row : *set) {
      std::printf("  %-16s  %9zu  %15.3f  %12zu\n", row.method.c_str(), row.sentences,
                  row.per_sentence_ms, row.pool_decodes);
    }
  }
  o.detail << "K=50 calibrate " << rows[1].per_sentence_ms << " ms vs tag "
           << rows[0].per_sentence_ms << " ms per sentence; duplicate-heavy pool memo "
           << mrows[0].seconds << " s vs " << mrows[1].seconds << " s";
}

}  // namespace
}  // namespace corrner

int main(int argc, char** argv) {
  using namespace corrner;
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
      {"CRF oracle equivalence", crf_oracle},
      {"gradient check", gradient_check},
      {"BM25 oracle equivalence", bm25_oracle},
      {"span round trip and metric fixtures", spans_and_metrics},
      {"calibration invariants", calibration_invariants},
      {"end-to-end direction (voting > baseline, correlator >= voting)", headline},
      {"low-resource improvement at fraction 0.05", low_resource},
      {"null safety (0 samples, empty pool)", null_safety},
      {"timing report", timing},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(number)) continue;
    Outcome o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << number << "] " << criteria[i].first
              << ": " << o.detail.str() << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
