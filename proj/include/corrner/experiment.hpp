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
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "corrner/calibrator.hpp"
#include "corrner/config.hpp"
#include "corrner/corpus.hpp"
#include "corrner/correlator.hpp"
#include "corrner/metrics.hpp"
#include "corrner/retriever.hpp"
#include "corrner/tagger.hpp"

namespace corrner {

enum class Method { kBaseline, kVoting, kCorrelator };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);

Json index_options_to_json(const IndexOptions& options);
IndexOptions index_options_from_json(const Json& j);

struct BenchmarkData {
  LabelSet labels;
  std::vector<LabeledSentence> train, dev, test;
  std::vector<std::string> pool;
};

// Reads train/dev/test.conll and pool.txt from a directory.
BenchmarkData load_benchmark(const std::string& dir);

struct ExperimentConfig {
  TrainConfig train;
  CorrelatorConfig correlator;
  VotePolicy vote;
  IndexOptions index;
  std::vector<std::string> templates;  // empty: default templates
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<Method> methods{Method::kBaseline, Method::kVoting, Method::kCorrelator};

  std::vector<FeatureTemplate> feature_templates() const;
  void validate() const;
  Json to_json() const;
  static ExperimentConfig from_json(const Json& j);
};

// Settings used for the synthetic benchmark: learning rate 0.02 and
// prefix-extension matching for both voting and the vote channel.
ExperimentConfig benchmark_defaults();

struct RunSpec {
  double fraction = 1.0;
  std::uint64_t seed = 1;
  std::optional<std::size_t> pool_size;  // seeded pool subsample; unset = whole pool
  std::optional<std::size_t> k;          // voting depth override
  std::optional<int> max_samples;        // correlator override
};

struct MethodRun {
  EvalReport report;
  std::vector<std::vector<std::string>> tags;  // test predictions
};

// Trains and evaluates methods on a benchmark. Indexes, retrieval results and
// the most recent plain model are cached between runs.
class Runner {
 public:
  Runner(BenchmarkData data, ExperimentConfig config);

  const BenchmarkData& data() const { return data_; }
  const ExperimentConfig& config() const { return config_; }
  const std::string& config_hash() const { return hash_; }

  // Sorted train indices of a seeded subsample; identity for fraction >= 1.
  std::vector<std::size_t> subsample(double fraction, std::uint64_t seed) const;

  std::shared_ptr<const Index> index(std::optional<std::size_t> pool_size);
  std::shared_ptr<const CrfModel> baseline(double fraction, std::uint64_t seed);

  std::map<Method, MethodRun> run(const RunSpec& spec, std::span<const Method> methods);

 private:
  enum Split { kTrain, kDev, kTest };
  struct PoolEntry {
    std::shared_ptr<const Index> index;
    std::array<std::vector<RetrievalResult>, 3> retrievals;
    std::array<std::size_t, 3> depth{0, 0, 0};
  };

  PoolEntry& pool_entry(std::optional<std::size_t> pool_size);
  const std::vector<RetrievalResult>& retrievals(PoolEntry& entry, Split split,
                                                 std::size_t depth);
  std::vector<EntitySpan> gold_spans(const LabeledSentence& s) const;
  EvalReport score(const std::vector<std::vector<EntitySpan>>& pred) const;

  BenchmarkData data_;
  ExperimentConfig config_;
  std::string hash_;
  std::vector<Sentence> test_sentences_;
  std::vector<std::vector<EntitySpan>> test_gold_;
  std::map<std::size_t, PoolEntry> pools_;  // key: pool size, SIZE_MAX for the whole pool
  std::optional<std::pair<double, std::uint64_t>> baseline_key_;
  std::shared_ptr<const CrfModel> baseline_;
};

std::string utc_timestamp();

}  // namespace corrner
