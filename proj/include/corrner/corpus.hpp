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

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace corrner {

enum class TagScheme { kBIO, kBIOES };
enum class DecodeMode { kStrict, kLenient };

std::string_view to_string(TagScheme scheme);
TagScheme parse_scheme(std::string_view name);

struct Sentence {
  std::string id;
  std::vector<std::string> tokens;

  std::size_t size() const { return tokens.size(); }
  std::string text() const;
};

// Half-open token range [start, end) carrying an entity type.
struct EntitySpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string type;
  std::string surface;

  friend bool operator==(const EntitySpan&, const EntitySpan&) = default;
};

struct LabeledSentence;

// Entity types plus the tag vocabulary they induce. Tag 0 is always "O",
// followed per type by B, I, E, S (BIOES) or B, I (BIO).
class LabelSet {
 public:
  LabelSet() = default;
  LabelSet(std::vector<std::string> types, TagScheme scheme);

  const std::vector<std::string>& types() const { return types_; }
  TagScheme scheme() const { return scheme_; }
  const std::vector<std::string>& tags() const { return tags_; }
  std::size_t size() const { return tags_.size(); }

  const std::string& tag(std::size_t index) const { return tags_[index]; }
  std::optional<std::size_t> index_of(std::string_view tag) const;
  bool has_type(std::string_view type) const;

  // Types in order of first appearance across the data.
  static LabelSet infer(std::span<const LabeledSentence> data,
                        TagScheme scheme);

  friend bool operator==(const LabelSet& a, const LabelSet& b) {
    return a.types_ == b.types_ && a.scheme_ == b.scheme_;
  }

 private:
  std::vector<std::string> types_;
  TagScheme scheme_ = TagScheme::kBIOES;
  std::vector<std::string> tags_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct LabeledSentence {
  Sentence sentence;
  std::vector<std::string> tags;
};

// Splits "B-CITY" into ('B', "CITY"); "O" gives ('O', "").
struct TagParts {
  char prefix = 'O';
  std::string_view type;
};
std::optional<TagParts> split_tag(std::string_view tag);

// Spans have empty surfaces; use the token overload to fill them.
std::vector<EntitySpan> decode_spans(std::span<const std::string> tags,
                                     TagScheme scheme, DecodeMode mode);
std::vector<EntitySpan> decode_spans(std::span<const std::string> tokens,
                                     std::span<const std::string> tags,
                                     TagScheme scheme, DecodeMode mode);

std::vector<std::string> encode_tags(std::span<const EntitySpan> spans,
                                     std::size_t length, TagScheme scheme);

std::string span_surface(std::span<const std::string> tokens,
                         std::size_t start, std::size_t end);

// Re-tags a sentence under another scheme (strict decode of the source).
LabeledSentence convert_scheme(const LabeledSentence& sentence, TagScheme from,
                               TagScheme to);

// BIOES if any E-/S- tag occurs, BIO otherwise.
TagScheme detect_scheme(std::span<const LabeledSentence> data);

// Character tokenization of raw text: one token per code point, whitespace
// dropped.
std::vector<std::string> tokenize_chars(std::string_view text);

struct ConllReadOptions {
  std::optional<LabelSet> label_set;
  // Drop sentences longer than this many tokens.
  std::optional<std::size_t> max_length;
  // Drop sentences without any entity.
  bool must_contain_entity = false;
};

std::vector<LabeledSentence> parse_conll(std::istream& in,
                                         const std::string& name,
                                         const ConllReadOptions& options = {});
std::vector<LabeledSentence> read_conll(const std::string& path,
                                        const ConllReadOptions& options = {});
void write_conll(std::ostream& out, std::span<const LabeledSentence> data);
void write_conll(std::span<const LabeledSentence> data,
                 const std::string& path);

// One raw text per line; trailing '\r' stripped, empty lines kept.
std::vector<std::string> read_lines(const std::string& path);
void write_lines(std::span<const std::string> lines, const std::string& path);

}  // namespace corrner
