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

#include "corrner/corpus.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "corrner/error.hpp"
#include "corrner/utf8.hpp"

namespace corrner {

std::string_view to_string(TagScheme scheme) {
  return scheme == TagScheme::kBIO ? "BIO" : "BIOES";
}

TagScheme parse_scheme(std::string_view name) {
  if (name == "BIO" || name == "bio") return TagScheme::kBIO;
  if (name == "BIOES" || name == "bioes") return TagScheme::kBIOES;
  throw ConfigError("unknown tag scheme '" + std::string(name) + "'");
}

std::string Sentence::text() const {
  std::string out;
  for (const auto& t : tokens) out += t;
  return out;
}

LabelSet::LabelSet(std::vector<std::string> types, TagScheme scheme)
    : types_(std::move(types)), scheme_(scheme) {
  std::unordered_set<std::string> seen;
  for (const auto& t : types_) {
    if (t.empty() || t == "O") {
      throw ConfigError("invalid entity type name '" + t + "'");
    }
    if (!seen.insert(t).second) {
      throw ConfigError("duplicate entity type '" + t + "'");
    }
  }
  tags_.push_back("O");
  const std::string_view prefixes =
      scheme_ == TagScheme::kBIOES ? std::string_view("BIES")
                                   : std::string_view("BI");
  for (const auto& t : types_) {
    for (char p : prefixes) tags_.push_back(std::string(1, p) + "-" + t);
  }
  for (std::size_t i = 0; i < tags_.size(); ++i) index_.emplace(tags_[i], i);
}

std::optional<std::size_t> LabelSet::index_of(std::string_view tag) const {
  auto it = index_.find(std::string(tag));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool LabelSet::has_type(std::string_view type) const {
  for (const auto& t : types_) {
    if (t == type) return true;
  }
  return false;
}

LabelSet LabelSet::infer(std::span<const LabeledSentence> data,
                         TagScheme scheme) {
  std::vector<std::string> types;
  std::unordered_set<std::string> seen;
  for (const auto& s : data) {
    for (const auto& tag : s.tags) {
      auto parts = split_tag(tag);
      if (!parts) throw DataError("unparseable tag '" + tag + "'");
      if (parts->prefix == 'O') continue;
      std::string type(parts->type);
      if (seen.insert(type).second) types.push_back(std::move(type));
    }
  }
  return LabelSet(std::move(types), scheme);
}

std::optional<TagParts> split_tag(std::string_view tag) {
  if (tag == "O") return TagParts{'O', {}};
  if (tag.size() < 3 || tag[1] != '-') return std::nullopt;
  const char p = tag[0];
  if (p != 'B' && p != 'I' && p != 'E' && p != 'S') return std::nullopt;
  return TagParts{p, tag.substr(2)};
}

namespace {

class SpanBuilder {
 public:
  SpanBuilder(TagScheme scheme, DecodeMode mode) : scheme_(scheme), mode_(mode) {}

  void feed(std::size_t pos, std::string_view tag) {
    auto parts = split_tag(tag);
    if (!parts) {
      throw MalformedTagsError(pos, "unparseable tag '" + std::string(tag) + "'");
    }
    if (scheme_ == TagScheme::kBIO &&
        (parts->prefix == 'E' || parts->prefix == 'S')) {
      throw MalformedTagsError(pos, "tag '" + std::string(tag) +
                                        "' is not part of the BIO scheme");
    }
    const bool strict = mode_ == DecodeMode::kStrict;
    const bool continues = open_ && open_type_ == parts->type;
    switch (parts->prefix) {
      case 'O':
        if (open_ && strict && scheme_ == TagScheme::kBIOES) {
          throw MalformedTagsError(pos, "entity opened by B- not closed by E-");
        }
        close(pos);
        break;
      case 'B':
        if (open_ && strict && scheme_ == TagScheme::kBIOES) {
          throw MalformedTagsError(pos, "B- inside an open entity");
        }
        close(pos);
        open(pos, parts->type);
        break;
      case 'S':
        if (open_ && strict) {
          throw MalformedTagsError(pos, "S- inside an open entity");
        }
        close(pos);
        spans_.push_back({pos, pos + 1, std::string(parts->type), {}});
        break;
      case 'I':
        if (!continues) {
          if (strict) {
            throw MalformedTagsError(pos, "I-" + std::string(parts->type) +
                                              " without a preceding B-/I- of "
                                              "the same type");
          }
          close(pos);
          open(pos, parts->type);
        }
        break;
      case 'E':
        if (!continues) {
          if (strict) {
            throw MalformedTagsError(pos, "E-" + std::string(parts->type) +
                                              " without a preceding B-/I- of "
                                              "the same type");
          }
          close(pos);
          open(pos, parts->type);
        }
        close(pos + 1);
        break;
    }
  }

  std::vector<EntitySpan> finish(std::size_t length) {
    if (open_ && mode_ == DecodeMode::kStrict &&
        scheme_ == TagScheme::kBIOES) {
      throw MalformedTagsError(length - 1, "entity not closed at end of sequence");
    }
    close(length);
    return std::move(spans_);
  }

 private:
  void open(std::size_t pos, std::string_view type) {
    open_ = true;
    open_start_ = pos;
    open_type_ = std::string(type);
  }

  void close(std::size_t end) {
    if (!open_) return;
    spans_.push_back({open_start_, end, open_type_, {}});
    open_ = false;
  }

  TagScheme scheme_;
  DecodeMode mode_;
  bool open_ = false;
  std::size_t open_start_ = 0;
  std::string open_type_;
  std::vector<EntitySpan> spans_;
};

}  // namespace

std::vector<EntitySpan> decode_spans(std::span<const std::string> tags,
                                     TagScheme scheme, DecodeMode mode) {
  SpanBuilder builder(scheme, mode);
  for (std::size_t i = 0; i < tags.size(); ++i) builder.feed(i, tags[i]);
  return builder.finish(tags.size());
}

std::vector<EntitySpan> decode_spans(std::span<const std::string> tokens,
                                     std::span<const std::string> tags,
                                     TagScheme scheme, DecodeMode mode) {
  if (tokens.size() != tags.size()) {
    throw DataError("token/tag count mismatch");
  }
  auto spans = decode_spans(tags, scheme, mode);
  for (auto& s : spans) s.surface = span_surface(tokens, s.start, s.end);
  return spans;
}

std::vector<std::string> encode_tags(std::span<const EntitySpan> spans,
                                     std::size_t length, TagScheme scheme) {
  std::vector<std::string> tags(length, "O");
  std::vector<bool> used(length, false);
  for (const auto& s : spans) {
    if (s.start >= s.end || s.end > length) {
      throw InvalidSpansError("span [" + std::to_string(s.start) + "," +
                              std::to_string(s.end) + ") out of range for length " +
                              std::to_string(length));
    }
    if (s.type.empty() || s.type == "O") {
      throw InvalidSpansError("span with invalid type '" + s.type + "'");
    }
    for (std::size_t i = s.start; i < s.end; ++i) {
      if (used[i]) {
        throw InvalidSpansError("overlapping spans at token " + std::to_string(i));
      }
      used[i] = true;
    }
    const bool single = s.end - s.start == 1;
    if (scheme == TagScheme::kBIOES && single) {
      tags[s.start] = "S-" + s.type;
      continue;
    }
    tags[s.start] = "B-" + s.type;
    for (std::size_t i = s.start + 1; i < s.end; ++i) tags[i] = "I-" + s.type;
    if (scheme == TagScheme::kBIOES) tags[s.end - 1] = "E-" + s.type;
  }
  return tags;
}

std::string span_surface(std::span<const std::string> tokens,
                         std::size_t start, std::size_t end) {
  std::string out;
  for (std::size_t i = start; i < end; ++i) out += tokens[i];
  return out;
}

LabeledSentence convert_scheme(const LabeledSentence& sentence, TagScheme from,
                               TagScheme to) {
  auto spans = decode_spans(sentence.tags, from, DecodeMode::kStrict);
  return {sentence.sentence, encode_tags(spans, sentence.tags.size(), to)};
}

TagScheme detect_scheme(std::span<const LabeledSentence> data) {
  for (const auto& s : data) {
    for (const auto& t : s.tags) {
      if (!t.empty() && (t[0] == 'E' || t[0] == 'S') && t.size() > 1 &&
          t[1] == '-') {
        return TagScheme::kBIOES;
      }
    }
  }
  return TagScheme::kBIO;
}

std::vector<std::string> tokenize_chars(std::string_view text) {
  std::vector<std::string> out;
  for (auto& cp : utf8::split_code_points(text)) {
    const auto decoded = utf8::decode(cp);
    if (decoded.size() == 1 && utf8::is_space(decoded[0])) continue;
    out.push_back(std::move(cp));
  }
  return out;
}

namespace {

struct PendingSentence {
  std::size_t first_line = 0;
  LabeledSentence data;
};

}  // namespace

std::vector<LabeledSentence> parse_conll(std::istream& in,
                                         const std::string& name,
                                         const ConllReadOptions& options) {
  std::vector<PendingSentence> raw;
  PendingSentence current;
  std::string line;
  std::size_t lineno = 0;
  auto flush = [&] {
    if (current.data.tags.empty()) return;
    current.data.sentence.id = std::to_string(raw.size());
    raw.push_back(std::move(current));
    current = {};
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos ||
        tab == 0 || tab + 1 == line.size()) {
      throw ParseError(name, lineno, "expected exactly two tab-separated columns");
    }
    std::string token = line.substr(0, tab);
    std::string tag = line.substr(tab + 1);
    if (!split_tag(tag)) {
      throw ParseError(name, lineno, "unparseable tag '" + tag + "'");
    }
    if (options.label_set && !options.label_set->index_of(tag)) {
      throw ParseError(name, lineno, "tag '" + tag + "' not in label set");
    }
    if (current.data.tags.empty()) current.first_line = lineno;
    current.data.sentence.tokens.push_back(std::move(token));
    current.data.tags.push_back(std::move(tag));
  }
  flush();

  std::vector<LabeledSentence> data;
  data.reserve(raw.size());
  for (auto& p : raw) data.push_back(std::move(p.data));

  // Validate every sentence under one scheme for the whole file.
  const TagScheme scheme =
      options.label_set ? options.label_set->scheme() : detect_scheme(data);
  for (std::size_t i = 0; i < data.size(); ++i) {
    try {
      decode_spans(data[i].tags, scheme, DecodeMode::kStrict);
    } catch (const MalformedTagsError& e) {
      const std::size_t at = raw[i].first_line + e.position();
      if (scheme == TagScheme::kBIOES) {
        bool bio_ok = true;
        try {
          decode_spans(data[i].tags, TagScheme::kBIO, DecodeMode::kStrict);
        } catch (const MalformedTagsError&) {
          bio_ok = false;
        }
        if (bio_ok) {
          throw ParseError(name, at, "mixed BIO and BIOES tagging in one file");
        }
      }
      throw ParseError(name, at, e.what());
    }
  }

  std::vector<LabeledSentence> kept;
  kept.reserve(data.size());
  for (auto& s : data) {
    if (options.max_length && s.tags.size() > *options.max_length) continue;
    if (options.must_contain_entity) {
      bool any = false;
      for (const auto& t : s.tags) any = any || t != "O";
      if (!any) continue;
    }
    s.sentence.id = std::to_string(kept.size());
    kept.push_back(std::move(s));
  }
  return kept;
}

std::vector<LabeledSentence> read_conll(const std::string& path,
                                        const ConllReadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return parse_conll(in, path, options);
}

void write_conll(std::ostream& out, std::span<const LabeledSentence> data) {
  for (const auto& s : data) {
    for (std::size_t i = 0; i < s.tags.size(); ++i) {
      out << s.sentence.tokens[i] << '\t' << s.tags[i] << '\n';
    }
    out << '\n';
  }
}

void write_conll(std::span<const LabeledSentence> data,
                 const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  write_conll(out, data);
  if (!out) throw DataError("write failed: " + path);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

void write_lines(std::span<const std::string> lines, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  for (const auto& l : lines) out << l << '\n';
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace corrner
