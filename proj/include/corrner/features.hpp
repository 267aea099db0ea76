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

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace corrner {

enum class TemplateKind { kUnigram, kBigram, kWindow, kCharType, kCorrelation };

// Correlation channels the tagger knows how to read.
inline constexpr std::string_view kNgramChannel = "ngram";
inline constexpr std::string_view kVoteChannel = "vote";

struct FeatureTemplate {
  TemplateKind kind = TemplateKind::kUnigram;
  int offset = 0;       // window, bigram (left token) and char-type offsets
  std::string channel;  // correlation channel name

  // "unigram", "bigram:-1", "window:2", "chartype:0", "corr:ngram"
  std::string name() const;
  static FeatureTemplate parse(std::string_view name);

  friend bool operator==(const FeatureTemplate&, const FeatureTemplate&) = default;
};

// Windows +-2, bigrams over that window, char types +-1.
std::vector<FeatureTemplate> default_templates();
// Default templates plus one correlation template per channel.
std::vector<FeatureTemplate> with_correlation(std::vector<FeatureTemplate> base,
                                              std::span<const std::string> channels);

// Retrieval-derived per-token values. Empty entries emit no feature, so a
// token without correlation evidence looks exactly like plain input.
struct CorrelationFeatures {
  std::vector<std::string> ngram;              // bin label per token
  std::vector<std::vector<std::string>> vote;  // "TYPE:bin" entries per token
  std::vector<std::uint32_t> provenance;       // contributing pool doc ids

  friend bool operator==(const CorrelationFeatures&,
                         const CorrelationFeatures&) = default;
};

// "CJK", "DIGIT", "ALPHA", "PUNCT" or "OTHER".
std::string_view char_type(std::string_view token);

// Feature strings firing at `position`, in template order.
std::vector<std::string> extract_feature_strings(
    std::span<const std::string> tokens, std::size_t position,
    std::span<const FeatureTemplate> templates,
    const CorrelationFeatures* correlation = nullptr);

}  // namespace corrner
