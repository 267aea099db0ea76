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

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "corrner/config.hpp"
#include "corrner/corpus.hpp"
#include "corrner/features.hpp"
#include "corrner/pool_tagger.hpp"
#include "corrner/retriever.hpp"
#include "corrner/tagger.hpp"

namespace corrner {

enum class SurfaceMatch {
  kExact,            // identical surface strings
  kPrefixExtension,  // pool surface = query surface + non-empty suffix
};

std::string_view to_string(SurfaceMatch match);
SurfaceMatch parse_surface_match(std::string_view name);

struct CorrelatorConfig {
  int max_samples = 12;
  int max_total_length = 256;  // code points, query + samples + separators
  std::vector<std::string> channels{std::string(kNgramChannel),
                                    std::string(kVoteChannel)};
  std::vector<int> ngram_orders{2, 3, 4};
  std::vector<int> bins{0, 1, 2};  // lower edges; the last bin is open ("2+")
  // How sentence substrings match group entity surfaces in the vote channel.
  // kPrefixExtension also accepts exact matches and requires
  // min_extension_prefix tokens.
  SurfaceMatch vote_match = SurfaceMatch::kExact;
  int min_extension_prefix = 2;
  bool exclude_verbatim_query = true;
  // Also emit "TYPE:top" for the strict-plurality type of a matched surface.
  bool plurality_feature = true;

  bool has_channel(std::string_view channel) const;
  void validate() const;
  Json to_json() const;
  static CorrelatorConfig from_json(const Json& j);
};

// Bin label for a count; "" for the lowest (zero-evidence) bin.
std::string bin_label(int count, std::span<const int> bins);

// Top-ranked texts, taken in rank order until max_samples or until the next
// sample would overflow the length budget.
std::vector<std::string> select_group(const RetrievalResult& retrieval,
                                      std::size_t query_length,
                                      const CorrelatorConfig& config);

// Per token: max over covering n-grams of the number of group samples that
// contain the n-gram, binned.
std::vector<std::string> ngram_support(std::span<const std::string> tokens,
                                       std::span<const std::string> group,
                                       const CorrelatorConfig& config);

// Per token "TYPE:bin" votes (plus "TYPE:top" for a strict plurality) from
// group predictions whose surfaces match a sentence substring; overlaps
// resolved longest first, then leftmost.
std::vector<std::vector<std::string>> entity_vote_channel(
    std::span<const std::string> tokens,
    std::span<const std::vector<EntitySpan>> group_predictions,
    const CorrelatorConfig& config);

// Full feature computation from an existing retrieval result; group
// predictions come from `pool` (the base model).
CorrelationFeatures correlate(const Sentence& sentence, const RetrievalResult& retrieval,
                              const PoolTagger& pool, const CorrelatorConfig& config);

// Retrieval + tagging front end bound to one index and base model.
class Correlator {
 public:
  Correlator(const Index& index, const CrfModel& base, CorrelatorConfig config);

  RetrievalResult retrieve(const Sentence& sentence) const;
  CorrelationFeatures features(const Sentence& sentence) const;
  std::vector<CorrelationFeatures> features(std::span<const Sentence> sentences) const;
  std::vector<CorrelationFeatures> features(
      std::span<const LabeledSentence> sentences) const;

  const CorrelatorConfig& config() const { return config_; }

 private:
  const Index& index_;
  CorrelatorConfig config_;
  PoolTagger pool_;
};

// Two-pass training: the plain model, then a correlation-augmented model
// whose features come from the plain model's predictions on retrieved
// samples. The returned model embeds the plain model as its base.
CrfModel train_correlated(const std::vector<LabeledSentence>& train_set,
                          const std::vector<LabeledSentence>& dev_set,
                          const TrainConfig& config, const LabelSet& labels,
                          const Index& index, const CorrelatorConfig& correlator,
                          const std::vector<FeatureTemplate>& templates = default_templates());

// Tags with a model, computing correlation features when it needs them.
std::vector<Tagged> tag_with_correlation(const CrfModel& model, const Index* index,
                                         std::span<const Sentence> sentences);

}  // namespace corrner
