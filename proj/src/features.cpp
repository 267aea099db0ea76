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

#include "corrner/features.hpp"

#include <charconv>

#include "corrner/error.hpp"
#include "corrner/utf8.hpp"

namespace corrner {

namespace {

constexpr std::string_view kBos = "<BOS>";
constexpr std::string_view kEos = "<EOS>";

std::string_view token_at(std::span<const std::string> tokens, long pos) {
  if (pos < 0) return kBos;
  if (pos >= static_cast<long>(tokens.size())) return kEos;
  return tokens[static_cast<std::size_t>(pos)];
}

int parse_offset(std::string_view s, std::string_view name) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("bad offset in feature template '" + std::string(name) + "'");
  }
  return v;
}

}  // namespace

std::string FeatureTemplate::name() const {
  switch (kind) {
    case TemplateKind::kUnigram:
      return "unigram";
    case TemplateKind::kBigram:
      return "bigram:" + std::to_string(offset);
    case TemplateKind::kWindow:
      return "window:" + std::to_string(offset);
    case TemplateKind::kCharType:
      return "chartype:" + std::to_string(offset);
    case TemplateKind::kCorrelation:
      return "corr:" + channel;
  }
  return {};
}

FeatureTemplate FeatureTemplate::parse(std::string_view name) {
  FeatureTemplate t;
  const auto colon = name.find(':');
  const std::string_view head = name.substr(0, colon);
  const std::string_view arg =
      colon == std::string_view::npos ? std::string_view() : name.substr(colon + 1);
  if (head == "unigram" && arg.empty()) {
    t.kind = TemplateKind::kUnigram;
  } else if (head == "bigram") {
    t.kind = TemplateKind::kBigram;
    t.offset = parse_offset(arg, name);
    if (t.offset < -2 || t.offset > 1) {
      throw ConfigError("bigram offset must lie in [-2, 1]: " + std::string(name));
    }
  } else if (head == "window") {
    t.kind = TemplateKind::kWindow;
    t.offset = parse_offset(arg, name);
    if (t.offset < -2 || t.offset > 2) {
      throw ConfigError("window offset must lie in [-2, 2]: " + std::string(name));
    }
  } else if (head == "chartype") {
    t.kind = TemplateKind::kCharType;
    t.offset = parse_offset(arg, name);
    if (t.offset < -2 || t.offset > 2) {
      throw ConfigError("char-type offset must lie in [-2, 2]: " + std::string(name));
    }
  } else if (head == "corr") {
    t.kind = TemplateKind::kCorrelation;
    t.channel = std::string(arg);
    if (t.channel != kNgramChannel && t.channel != kVoteChannel) {
      throw ConfigError("unknown correlation channel '" + t.channel + "'");
    }
  } else {
    throw ConfigError("unknown feature template '" + std::string(name) + "'");
  }
  return t;
}

std::vector<FeatureTemplate> default_templates() {
  std::vector<FeatureTemplate> out;
  out.push_back({TemplateKind::kUnigram, 0, {}});
  for (int o : {-2, -1, 1, 2}) out.push_back({TemplateKind::kWindow, o, {}});
  for (int o : {-2, -1, 0, 1}) out.push_back({TemplateKind::kBigram, o, {}});
  for (int o : {-1, 0, 1}) out.push_back({TemplateKind::kCharType, o, {}});
  return out;
}

std::vector<FeatureTemplate> with_correlation(std::vector<FeatureTemplate> base,
                                              std::span<const std::string> channels) {
  for (const auto& c : channels) base.push_back(FeatureTemplate::parse("corr:" + c));
  return base;
}

std::string_view char_type(std::string_view token) {
  if (token == kBos || token == kEos) return token;
  const auto cps = utf8::decode(token);
  if (cps.empty()) return "OTHER";
  const char32_t cp = cps[0];
  if (utf8::is_cjk(cp)) return "CJK";
  if (cp >= '0' && cp <= '9') return "DIGIT";
  if (utf8::is_ascii_alnum(cp)) return "ALPHA";
  if ((cp < 0x80 && cp > 0x20) || (cp >= 0x3000 && cp <= 0x303F) ||
      (cp >= 0xFF00 && cp <= 0xFF65)) {
    return "PUNCT";
  }
  return "OTHER";
}

std::vector<std::string> extract_feature_strings(
    std::span<const std::string> tokens, std::size_t position,
    std::span<const FeatureTemplate> templates,
    const CorrelationFeatures* correlation) {
  std::vector<std::string> out;
  out.reserve(templates.size() + 2);
  const long pos = static_cast<long>(position);
  for (const auto& t : templates) {
    switch (t.kind) {
      case TemplateKind::kUnigram:
        out.push_back("U0=" + std::string(token_at(tokens, pos)));
        break;
      case TemplateKind::kWindow:
        out.push_back("U" + std::to_string(t.offset) + "=" +
                      std::string(token_at(tokens, pos + t.offset)));
        break;
      case TemplateKind::kBigram:
        out.push_back("B" + std::to_string(t.offset) + "=" +
                      std::string(token_at(tokens, pos + t.offset)) + "/" +
                      std::string(token_at(tokens, pos + t.offset + 1)));
        break;
      case TemplateKind::kCharType:
        out.push_back("T" + std::to_string(t.offset) + "=" +
                      std::string(char_type(token_at(tokens, pos + t.offset))));
        break;
      case TemplateKind::kCorrelation:
        if (correlation == nullptr) break;
        if (t.channel == kNgramChannel) {
          if (position < correlation->ngram.size() &&
              !correlation->ngram[position].empty()) {
            out.push_back("CORR:ngram=" + correlation->ngram[position]);
          }
        } else if (position < correlation->vote.size()) {
          for (const auto& v : correlation->vote[position]) {
            out.push_back("CORR:vote=" + v);
          }
        }
        break;
    }
  }
  return out;
}

}  // namespace corrner
