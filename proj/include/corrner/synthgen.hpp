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
#include <string>
#include <vector>

#include "corrner/config.hpp"
#include "corrner/corpus.hpp"

namespace corrner {

inline constexpr int kLevels = 5;
inline constexpr std::array<const char*, kLevels> kLevelNames{"PROV", "CITY", "DISTRICT",
                                                               "TOWN", "POI"};

struct GazetteerNode {
  std::string name;
  int level = 0;
  int parent = -1;  // -1 for provinces
  std::string suffix;

  std::string full() const { return name + suffix; }
};

struct SharedName {
  std::string name;
  int upper_level = 0;  // also used at upper_level + 1
};

struct Gazetteer {
  std::vector<GazetteerNode> nodes;  // grouped by level, parents first
  std::array<std::vector<int>, kLevels> by_level;
  std::vector<SharedName> shared;

  // Node ids from the root down to `node`.
  std::vector<int> path(int node) const;
  std::vector<std::string> inventory(int level) const;  // sorted, unique

  Json to_json() const;
  static Gazetteer from_json(const Json& j);
};

struct GenConfig {
  std::uint64_t seed = 7;
  // Provinces, then children per parent for each lower level.
  std::array<int, kLevels> sizes{20, 4, 3, 2, 2};
  double long_name_rate = 0.5;   // three-syllable names; the rest have two
  double ambiguity_rate = 0.25;  // shared names per adjacent pair, as a share of the upper level
  double suffix_drop_rate = 0.4;
  double level_skip_rate = 0.2;
  int n_train = 1000;
  int n_dev = 200;
  int n_test = 500;
  int n_pool = 100000;
  int renderings_per_location = 6;  // pool renderings of each labeled path
  double distractor_rate = 0.1;     // pool share drawn from name-sharing paths
  double detail_rate = 0.8;         // house-number style trailing detail
  double prefix_rate = 0.1;         // leading delivery phrase
  bool guarantee_correlated = true;  // a full-suffix pool rendering per labeled path

  void validate() const;
  Json to_json() const;
  static GenConfig from_json(const Json& j);
};

Gazetteer generate_gazetteer(const GenConfig& config);

struct SyntheticCorpus {
  LabelSet labels;
  std::vector<LabeledSentence> train, dev, test;
  std::vector<std::string> pool;
  // Gazetteer leaf node behind each labeled sentence, per split.
  std::vector<int> train_paths, dev_paths, test_paths;
};

SyntheticCorpus generate_corpus(const Gazetteer& gazetteer, const GenConfig& config);

LabelSet synthetic_label_set();

// Writes train/dev/test.conll, pool.txt, gazetteer.json and manifest.json.
void write_synthetic(const SyntheticCorpus& corpus, const Gazetteer& gazetteer,
                     const GenConfig& config, const std::string& dir);

}  // namespace corrner
