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

#include "corrner/correlator.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "corrner/error.hpp"
#include "corrner/parallel.hpp"
#include "corrner/utf8.hpp"

namespace corrner {

std::string_view to_string(SurfaceMatch match) {
  return match == SurfaceMatch::kExact ? "exact" : "prefix-extension";
}

SurfaceMatch parse_surface_match(std::string_view name) {
  if (name == "exact" || name == "exact-surface") return SurfaceMatch::kExact;
  if (name == "prefix-extension" || name == "prefix") return SurfaceMatch::kPrefixExtension;
  throw ConfigError("unknown match mode '" + std::string(name) + "'");
}

bool CorrelatorConfig::has_channel(std::string_view channel) const {
  return std::find(channels.begin(), channels.end(), channel) != channels.end();
}

void CorrelatorConfig::validate() const {
  if (max_samples < 0) throw ConfigError("max_samples must be >= 0");
  if (max_total_length < 0) throw ConfigError("max_total_length must be >= 0");
  for (const auto& c : channels) {
    if (c != kNgramChannel && c != kVoteChannel) {
      throw ConfigError("unknown correlation channel '" + c + "'");
    }
  }
  for (int n : ngram_orders) {
    if (n < 2) throw ConfigError("n-gram orders must be >= 2");
  }
  if (bins.empty() || bins.front() != 0 ||
      !std::is_sorted(bins.begin(), bins.end()) ||
      std::adjacent_find(bins.begin(), bins.end()) != bins.end()) {
    throw ConfigError("bins must be strictly increasing and start at 0");
  }
  if (min_extension_prefix < 1) throw ConfigError("min_extension_prefix must be >= 1");
}

Json CorrelatorConfig::to_json() const {
  return {{"max_samples", max_samples},
          {"max_total_length", max_total_length},
          {"channels", channels},
          {"ngram_orders", ngram_orders},
          {"bins", bins},
          {"vote_match", to_string(vote_match)},
          {"min_extension_prefix", min_extension_prefix},
          {"exclude_verbatim_query", exclude_verbatim_query},
          {"plurality_feature", plurality_feature}};
}

CorrelatorConfig CorrelatorConfig::from_json(const Json& j) {
  check_keys(j, {"max_samples", "max_total_length", "channels", "ngram_orders", "bins",
                 "vote_match", "min_extension_prefix", "exclude_verbatim_query",
                 "plurality_feature"},
             "correlator");
  CorrelatorConfig c;
  c.max_samples = get_or(j, "max_samples", c.max_samples);
  c.max_total_length = get_or(j, "max_total_length", c.max_total_length);
  c.channels = get_or(j, "channels", c.channels);
  c.ngram_orders = get_or(j, "ngram_orders", c.ngram_orders);
  c.bins = get_or(j, "bins", c.bins);
  c.vote_match = parse_surface_match(
      get_or(j, "vote_match", std::string(to_string(c.vote_match))));
  c.min_extension_prefix = get_or(j, "min_extension_prefix", c.min_extension_prefix);
  c.exclude_verbatim_query = get_or(j, "exclude_verbatim_query", c.exclude_verbatim_query);
  c.plurality_feature = get_or(j, "plurality_feature", c.plurality_feature);
  c.validate();
  return c;
}

std::string bin_label(int count, std::span<const int> bins) {
  std::size_t k = 0;
  while (k + 1 < bins.size() && count >= bins[k + 1]) ++k;
  if (k == 0) return {};
  std::string label = std::to_string(bins[k]);
  if (k + 1 == bins.size()) label += "+";
  return label;
}

namespace {

std::vector<std::size_t> select_hits(const RetrievalResult& retrieval,
                                     std::size_t query_length,
                                     const CorrelatorConfig& config) {
  std::vector<std::size_t> out;
  std::size_t used = query_length;
  for (std::size_t i = 0; i < retrieval.hits.size(); ++i) {
    if (out.size() >= static_cast<std::size_t>(std::max(config.max_samples, 0))) break;
    const std::size_t need = utf8::length(retrieval.hits[i].text) + 1;
    if (used + need > static_cast<std::size_t>(config.max_total_length)) break;
    used += need;
    out.push_back(i);
  }
  return out;
}

std::string join(std::span<const std::string> tokens, std::size_t start, std::size_t end) {
  return span_surface(tokens, start, end);
}

}  // namespace

std::vector<std::string> select_group(const RetrievalResult& retrieval,
                                      std::size_t query_length,
                                      const CorrelatorConfig& config) {
  std::vector<std::string> out;
  for (std::size_t i : select_hits(retrieval, query_length, config)) {
    out.push_back(retrieval.hits[i].text);
  }
  return out;
}

std::vector<std::string> ngram_support(std::span<const std::string> tokens,
                                       std::span<const std::string> group,
                                       const CorrelatorConfig& config) {
  const std::size_t n = tokens.size();
  std::vector<int> best(n, 0);
  if (!group.empty()) {
    std::vector<std::unordered_set<std::string>> grams(group.size());
    for (std::size_t g = 0; g < group.size(); ++g) {
      const auto sample = tokenize_chars(group[g]);
      for (int order : config.ngram_orders) {
        const auto len = static_cast<std::size_t>(order);
        for (std::size_t i = 0; i + len <= sample.size(); ++i) {
          grams[g].insert(join(sample, i, i + len));
        }
      }
    }
    for (int order : config.ngram_orders) {
      const auto len = static_cast<std::size_t>(order);
      for (std::size_t i = 0; i + len <= n; ++i) {
        const std::string gram = join(tokens, i, i + len);
        int count = 0;
        for (const auto& set : grams) count += set.count(gram) > 0 ? 1 : 0;
        for (std::size_t t = i; t < i + len; ++t) best[t] = std::max(best[t], count);
      }
    }
  }
  std::vector<std::string> out(n);
  for (std::size_t t = 0; t < n; ++t) out[t] = bin_label(best[t], config.bins);
  return out;
}

std::vector<std::vector<std::string>> entity_vote_channel(
    std::span<const std::string> tokens,
    std::span<const std::vector<EntitySpan>> group_predictions,
    const CorrelatorConfig& config) {
  using Tally = std::map<std::string, int>;
  std::unordered_map<std::string, Tally> exact;
  std::unordered_map<std::string, Tally> extended;
  std::size_t longest = 0;
  for (const auto& spans : group_predictions) {
    for (const auto& span : spans) {
      ++exact[span.surface][span.type];
      const auto pieces = utf8::split_code_points(span.surface);
      longest = std::max(longest, pieces.size());
      if (config.vote_match != SurfaceMatch::kPrefixExtension) continue;
      std::string prefix;
      for (std::size_t k = 0; k + 1 < pieces.size(); ++k) {
        prefix += pieces[k];
        if (k + 1 >= static_cast<std::size_t>(config.min_extension_prefix)) {
          ++extended[prefix][span.type];
        }
      }
    }
  }

  struct Match {
    std::size_t start, end;
    Tally tally;
  };
  std::vector<Match> candidates;
  const std::size_t n = tokens.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j <= std::min(n, i + longest); ++j) {
      const std::string s = join(tokens, i, j);
      Tally tally;
      if (auto it = exact.find(s); it != exact.end()) tally = it->second;
      if (auto it = extended.find(s); it != extended.end()) {
        for (const auto& [type, c] : it->second) tally[type] += c;
      }
      if (!tally.empty()) candidates.push_back({i, j, std::move(tally)});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const Match& a, const Match& b) {
    const auto la = a.end - a.start, lb = b.end - b.start;
    return la != lb ? la > lb : a.start < b.start;
  });

  std::vector<std::vector<std::string>> out(n);
  std::vector<bool> taken(n, false);
  for (const auto& m : candidates) {
    bool free = true;
    for (std::size_t t = m.start; t < m.end; ++t) free = free && !taken[t];
    if (!free) continue;
    std::vector<std::string> values;
    std::string top;
    int best = 0;
    bool tie = false;
    for (const auto& [type, count] : m.tally) {
      const std::string label = bin_label(count, config.bins);
      if (!label.empty()) values.push_back(type + ":" + label);
      if (count > best) {
        best = count;
        top = type;
        tie = false;
      } else if (count == best) {
        tie = true;
      }
    }
    if (config.plurality_feature && !tie && !bin_label(best, config.bins).empty()) {
      values.push_back(top + ":top");
    }
    for (std::size_t t = m.start; t < m.end; ++t) {
      taken[t] = true;
      out[t] = values;
    }
  }
  return out;
}

CorrelationFeatures correlate(const Sentence& sentence, const RetrievalResult& retrieval,
                              const PoolTagger& pool, const CorrelatorConfig& config) {
  CorrelationFeatures out;
  const std::size_t n = sentence.tokens.size();
  out.ngram.assign(n, {});
  out.vote.assign(n, {});
  const auto picked = select_hits(retrieval, n, config);
  if (picked.empty()) return out;

  std::vector<std::string> group;
  for (std::size_t i : picked) {
    group.push_back(retrieval.hits[i].text);
    out.provenance.push_back(retrieval.hits[i].doc_id);
  }
  if (config.has_channel(kNgramChannel)) {
    out.ngram = ngram_support(sentence.tokens, group, config);
  }
  if (config.has_channel(kVoteChannel)) {
    std::vector<std::vector<EntitySpan>> predictions;
    for (std::size_t i : picked) predictions.push_back(*pool.spans(retrieval.hits[i].doc_id));
    out.vote = entity_vote_channel(sentence.tokens, predictions, config);
  }
  return out;
}

Correlator::Correlator(const Index& index, const CrfModel& base, CorrelatorConfig config)
    : index_(index), config_(std::move(config)), pool_(base, index) {
  config_.validate();
  if (base.uses_correlation()) {
    throw ConfigError("the correlator's base model must not use correlation features");
  }
}

RetrievalResult Correlator::retrieve(const Sentence& sentence) const {
  RetrieveOptions options;
  options.query_id = sentence.id;
  options.exclude_verbatim_query = config_.exclude_verbatim_query;
  return retrieve_topk(index_, sentence.text(),
                       static_cast<std::size_t>(std::max(config_.max_samples, 0)), options);
}

CorrelationFeatures Correlator::features(const Sentence& sentence) const {
  return correlate(sentence, retrieve(sentence), pool_, config_);
}

std::vector<CorrelationFeatures> Correlator::features(
    std::span<const Sentence> sentences) const {
  std::vector<CorrelationFeatures> out(sentences.size());
  parallel_for(sentences.size(), [&](std::size_t i) { out[i] = features(sentences[i]); });
  return out;
}

std::vector<CorrelationFeatures> Correlator::features(
    std::span<const LabeledSentence> sentences) const {
  std::vector<CorrelationFeatures> out(sentences.size());
  parallel_for(sentences.size(),
               [&](std::size_t i) { out[i] = features(sentences[i].sentence); });
  return out;
}

CrfModel train_correlated(const std::vector<LabeledSentence>& train_set,
                          const std::vector<LabeledSentence>& dev_set,
                          const TrainConfig& config, const LabelSet& labels,
                          const Index& index, const CorrelatorConfig& correlator,
                          const std::vector<FeatureTemplate>& templates) {
  auto base = std::make_shared<const CrfModel>(
      train({train_set, {}}, {dev_set, {}}, config, labels, templates));
  const Correlator corr(index, *base, correlator);
  const auto train_features = corr.features(std::span<const LabeledSentence>(train_set));
  const auto dev_features = corr.features(std::span<const LabeledSentence>(dev_set));
  CrfModel model = train({train_set, train_features}, {dev_set, dev_features}, config,
                         labels, with_correlation(templates, correlator.channels));
  model.correlator = correlator.to_json();
  model.base_model = std::move(base);
  return model;
}

std::vector<Tagged> tag_with_correlation(const CrfModel& model, const Index* index,
                                         std::span<const Sentence> sentences) {
  if (!model.uses_correlation()) return tag(model, sentences);
  if (index == nullptr) {
    throw ConfigError("model uses correlation features; an index is required");
  }
  if (!model.base_model || model.correlator.is_null()) {
    throw DataError("correlation-augmented model is missing its base model");
  }
  const Correlator corr(*index, *model.base_model,
                        CorrelatorConfig::from_json(model.correlator));
  return tag(model, sentences, corr.features(sentences));
}

}  // namespace corrner
