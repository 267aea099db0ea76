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

#include "corrner/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "corrner/error.hpp"
#include "corrner/utf8.hpp"

namespace corrner {
namespace {

// Name syllables; none of them is a suffix or category character.
constexpr std::string_view kSyllables =
    "安宝北滨博昌长辰川春丹德东都丰福阜贵桂海汉和河衡红华淮黄惠吉佳江金锦京"
    "靖九居凯康兰乐黎丽连良辽临灵龙隆鲁罗茂梅蒙明牡南宁磐平浦普启潜青清庆泉"
    "荣瑞润三沙山汕韶绍深沈盛石寿舒顺松苏绥太泰唐天通同桐万威潍文乌武西锡仙"
    "咸襄孝新信兴秀徐许宣雅延阳伊宜义益银永榆玉元远月云枣湛昭肇鄭郑舟珠株"
    "淄遵";

constexpr std::array<std::string_view, 4> kPrefixes{"寄到", "送至", "地址", "收件"};
constexpr std::array<std::string_view, 2> kDistrictSuffixes{"区", "县"};
constexpr std::array<std::string_view, 3> kTownSuffixes{"镇", "乡", "街道"};
constexpr std::array<std::string_view, 8> kPoiSuffixes{"小区", "大厦", "公园", "中学",
                                                       "医院", "广场", "花园", "商场"};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return uniform() < p; }
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

std::string level_suffix(int level, Rng& rng) {
  switch (level) {
    case 0: return "省";
    case 1: return "市";
    case 2: return std::string(kDistrictSuffixes[rng.below(kDistrictSuffixes.size())]);
    case 3: return std::string(kTownSuffixes[rng.below(kTownSuffixes.size())]);
    default: return std::string(kPoiSuffixes[rng.below(kPoiSuffixes.size())]);
  }
}

struct Rendered {
  std::vector<std::string> tokens;
  std::vector<EntitySpan> spans;
};

void push_text(Rendered& r, std::string_view text) {
  for (auto& piece : utf8::split_code_points(text)) r.tokens.push_back(piece);
}

Rendered render(const Gazetteer& g, const std::vector<int>& path, Rng& rng,
                const GenConfig& config, bool full) {
  Rendered r;
  if (!full && rng.chance(config.prefix_rate)) {
    push_text(r, kPrefixes[rng.below(kPrefixes.size())]);
  }
  for (std::size_t i = 0; i < path.size(); ++i) {
    const auto& node = g.nodes[path[i]];
    if (!full && i + 1 < path.size() && rng.chance(config.level_skip_rate)) continue;
    const bool keep_suffix = full || !rng.chance(config.suffix_drop_rate);
    EntitySpan span;
    span.start = r.tokens.size();
    push_text(r, node.name);
    if (keep_suffix) push_text(r, node.suffix);
    span.end = r.tokens.size();
    span.type = kLevelNames[node.level];
    span.surface = span_surface(r.tokens, span.start, span.end);
    r.spans.push_back(std::move(span));
  }
  if (rng.chance(config.detail_rate)) {
    std::string detail = std::to_string(1 + rng.below(200)) + "号";
    if (rng.chance(0.5)) detail += std::to_string(1 + rng.below(30)) + "栋";
    if (rng.chance(0.5)) detail += std::to_string(101 + rng.below(2400)) + "室";
    push_text(r, detail);
  }
  return r;
}

std::string joined(const Rendered& r) {
  std::string out;
  for (const auto& t : r.tokens) out += t;
  return out;
}

int pick_leaf(const Gazetteer& g, Rng& rng) {
  // End level: district 20%, town 30%, POI 50%.
  const double u = rng.uniform();
  const int level = u < 0.2 ? 2 : (u < 0.5 ? 3 : 4);
  const auto& nodes = g.by_level[level];
  return nodes[rng.below(nodes.size())];
}

}  // namespace

std::vector<int> Gazetteer::path(int node) const {
  std::vector<int> out;
  for (int n = node; n >= 0; n = nodes.at(n).parent) out.push_back(n);
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<std::string> Gazetteer::inventory(int level) const {
  std::set<std::string> names;
  for (int id : by_level.at(level)) names.insert(nodes[id].name);
  return {names.begin(), names.end()};
}

Json Gazetteer::to_json() const {
  Json levels = Json::array();
  for (const char* name : kLevelNames) levels.push_back(name);
  Json ns = Json::array();
  for (const auto& n : nodes) {
    ns.push_back({{"name", n.name}, {"level", n.level}, {"parent", n.parent},
                  {"suffix", n.suffix}});
  }
  Json sh = Json::array();
  for (const auto& s : shared) {
    sh.push_back({{"name", s.name},
                  {"levels", {kLevelNames[s.upper_level], kLevelNames[s.upper_level + 1]}}});
  }
  return {{"levels", levels}, {"nodes", ns}, {"shared", sh}};
}

Gazetteer Gazetteer::from_json(const Json& j) {
  Gazetteer g;
  try {
    for (const auto& n : j.at("nodes")) {
      GazetteerNode node{n.at("name").get<std::string>(), n.at("level").get<int>(),
                         n.at("parent").get<int>(), n.at("suffix").get<std::string>()};
      if (node.level < 0 || node.level >= kLevels) throw DataError("bad gazetteer level");
      g.by_level[node.level].push_back(static_cast<int>(g.nodes.size()));
      g.nodes.push_back(std::move(node));
    }
    for (const auto& s : j.at("shared")) {
      const auto upper = s.at("levels").at(0).get<std::string>();
      const auto it = std::find(kLevelNames.begin(), kLevelNames.end(), upper);
      if (it == kLevelNames.end()) throw DataError("bad gazetteer level '" + upper + "'");
      g.shared.push_back({s.at("name").get<std::string>(),
                          static_cast<int>(it - kLevelNames.begin())});
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed gazetteer: ") + e.what());
  }
  return g;
}

void GenConfig::validate() const {
  for (double rate : {long_name_rate, ambiguity_rate, suffix_drop_rate, level_skip_rate, distractor_rate,
                      detail_rate, prefix_rate}) {
    if (!(rate >= 0.0 && rate <= 1.0)) throw ConfigError("rates must lie in [0, 1]");
  }
  for (int s : sizes) {
    if (s < 1) throw ConfigError("gazetteer sizes must be >= 1");
  }
  if (n_train < 0 || n_dev < 0 || n_test < 0 || n_pool < 0) {
    throw ConfigError("split sizes must be >= 0");
  }
  if (renderings_per_location < 1) throw ConfigError("renderings_per_location must be >= 1");
}

Json GenConfig::to_json() const {
  return {{"seed", seed},
          {"long_name_rate", long_name_rate},
          {"sizes", sizes},
          {"ambiguity_rate", ambiguity_rate},
          {"suffix_drop_rate", suffix_drop_rate},
          {"level_skip_rate", level_skip_rate},
          {"n_train", n_train},
          {"n_dev", n_dev},
          {"n_test", n_test},
          {"n_pool", n_pool},
          {"renderings_per_location", renderings_per_location},
          {"distractor_rate", distractor_rate},
          {"detail_rate", detail_rate},
          {"prefix_rate", prefix_rate},
          {"guarantee_correlated", guarantee_correlated}};
}

GenConfig GenConfig::from_json(const Json& j) {
  check_keys(j, {"seed", "sizes", "ambiguity_rate", "suffix_drop_rate", "level_skip_rate",
                 "n_train", "n_dev", "n_test", "n_pool", "renderings_per_location",
                 "distractor_rate", "detail_rate", "prefix_rate", "guarantee_correlated", "long_name_rate"},
             "synth");
  GenConfig c;
  c.seed = get_or(j, "seed", c.seed);
  c.sizes = get_or(j, "sizes", c.sizes);
  c.ambiguity_rate = get_or(j, "ambiguity_rate", c.ambiguity_rate);
  c.suffix_drop_rate = get_or(j, "suffix_drop_rate", c.suffix_drop_rate);
  c.level_skip_rate = get_or(j, "level_skip_rate", c.level_skip_rate);
  c.n_train = get_or(j, "n_train", c.n_train);
  c.n_dev = get_or(j, "n_dev", c.n_dev);
  c.n_test = get_or(j, "n_test", c.n_test);
  c.n_pool = get_or(j, "n_pool", c.n_pool);
  c.renderings_per_location = get_or(j, "renderings_per_location", c.renderings_per_location);
  c.distractor_rate = get_or(j, "distractor_rate", c.distractor_rate);
  c.detail_rate = get_or(j, "detail_rate", c.detail_rate);
  c.prefix_rate = get_or(j, "prefix_rate", c.prefix_rate);
  c.long_name_rate = get_or(j, "long_name_rate", c.long_name_rate);
  c.guarantee_correlated = get_or(j, "guarantee_correlated", c.guarantee_correlated);
  c.validate();
  return c;
}

Gazetteer generate_gazetteer(const GenConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const auto syllables = utf8::split_code_points(kSyllables);
  std::unordered_set<std::string> used;
  std::size_t total = 0;
  std::size_t width = 1;
  for (int s : config.sizes) {
    width *= static_cast<std::size_t>(s);
    total += width;
  }
  if (total > syllables.size() * syllables.size() / 2) {
    throw ConfigError("gazetteer too large for the name inventory");
  }
  auto fresh_name = [&] {
    for (;;) {
      std::string name = syllables[rng.below(syllables.size())] +
                         syllables[rng.below(syllables.size())];
      if (rng.chance(config.long_name_rate)) name += syllables[rng.below(syllables.size())];
      if (used.insert(name).second) return name;
    }
  };

  Gazetteer g;
  for (int level = 0; level < kLevels; ++level) {
    const std::vector<int> parents =
        level == 0 ? std::vector<int>{-1} : g.by_level[level - 1];
    const int per_parent = config.sizes[level];
    for (int parent : parents) {
      for (int k = 0; k < per_parent; ++k) {
        g.by_level[level].push_back(static_cast<int>(g.nodes.size()));
        g.nodes.push_back({fresh_name(), level, parent, level_suffix(level, rng)});
      }
    }
  }

  // Cross-level collisions: an upper-level name reused by one node one level
  // down. Nodes that received a name never pass it further down.
  std::unordered_set<int> received;
  for (int level = 0; level + 1 < kLevels; ++level) {
    const auto count = static_cast<std::size_t>(
        std::llround(config.ambiguity_rate * static_cast<double>(g.by_level[level].size())));
    if (count == 0) continue;
    std::vector<int> sources;
    for (int id : g.by_level[level]) {
      if (!received.count(id)) sources.push_back(id);
    }
    std::vector<int> targets = g.by_level[level + 1];
    if (count > sources.size() || count > targets.size()) {
      throw ConfigError("more ambiguous names requested than the inventory holds at level " +
                        std::string(kLevelNames[level]));
    }
    rng.shuffle(sources);
    rng.shuffle(targets);
    for (std::size_t i = 0; i < count; ++i) {
      g.nodes[targets[i]].name = g.nodes[sources[i]].name;
      received.insert(targets[i]);
      g.shared.push_back({g.nodes[sources[i]].name, level});
    }
  }
  return g;
}

LabelSet synthetic_label_set() {
  return LabelSet({kLevelNames.begin(), kLevelNames.end()}, TagScheme::kBIOES);
}

SyntheticCorpus generate_corpus(const Gazetteer& g, const GenConfig& config) {
  config.validate();
  for (const auto& level : g.by_level) {
    if (level.empty()) throw ConfigError("gazetteer has an empty level");
  }
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  SyntheticCorpus out{synthetic_label_set(), {}, {}, {}, {}, {}, {}, {}};

  const std::size_t n_labeled =
      static_cast<std::size_t>(config.n_train + config.n_dev + config.n_test);
  if (config.guarantee_correlated && static_cast<std::size_t>(config.n_pool) < n_labeled) {
    throw ConfigError("pool size " + std::to_string(config.n_pool) +
                      " cannot hold a correlated rendering for each of " +
                      std::to_string(n_labeled) + " labeled locations");
  }

  std::unordered_set<std::string> seen;
  std::vector<int> leaves;
  std::vector<LabeledSentence> labeled;
  const std::size_t max_attempts = 50 * n_labeled + 1000;
  for (std::size_t attempt = 0; labeled.size() < n_labeled; ++attempt) {
    if (attempt >= max_attempts) {
      throw ConfigError("gazetteer too small for the requested number of distinct sentences");
    }
    const int leaf = pick_leaf(g, rng);
    Rendered r = render(g, g.path(leaf), rng, config, false);
    std::string text = joined(r);
    if (!seen.insert(text).second) continue;
    LabeledSentence s;
    s.tags = encode_tags(r.spans, r.tokens.size(), TagScheme::kBIOES);
    s.sentence.tokens = std::move(r.tokens);
    labeled.push_back(std::move(s));
    leaves.push_back(leaf);
  }
  const auto n_train = static_cast<std::size_t>(config.n_train);
  const auto n_dev = static_cast<std::size_t>(config.n_dev);
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    auto& split = i < n_train ? out.train : (i < n_train + n_dev ? out.dev : out.test);
    auto& paths =
        i < n_train ? out.train_paths : (i < n_train + n_dev ? out.dev_paths : out.test_paths);
    labeled[i].sentence.id = std::to_string(split.size());
    split.push_back(std::move(labeled[i]));
    paths.push_back(leaves[i]);
  }

  // Pool: guaranteed full renderings, extra renderings per labeled path,
  // distractors, then background renderings of random paths.
  const auto n_pool = static_cast<std::size_t>(config.n_pool);
  const auto n_distract = static_cast<std::size_t>(
      std::llround(config.distractor_rate * static_cast<double>(n_pool)));
  std::vector<std::string>& pool = out.pool;
  pool.reserve(n_pool);
  if (config.guarantee_correlated) {
    for (int leaf : leaves) pool.push_back(joined(render(g, g.path(leaf), rng, config, true)));
  }
  const std::size_t extra_limit = n_pool > pool.size() + n_distract
                                      ? n_pool - n_distract
                                      : pool.size();
  for (int r = config.guarantee_correlated ? 1 : 0; r < config.renderings_per_location; ++r) {
    for (int leaf : leaves) {
      if (pool.size() >= extra_limit) break;
      pool.push_back(joined(render(g, g.path(leaf), rng, config, false)));
    }
  }

  std::unordered_map<std::string, std::vector<int>> by_first;
  for (std::size_t id = 0; id < g.nodes.size(); ++id) {
    by_first[utf8::split_code_points(g.nodes[id].name).front()].push_back(static_cast<int>(id));
  }
  auto random_node = [&] { return static_cast<int>(rng.below(g.nodes.size())); };
  for (std::size_t k = 0; k < n_distract && pool.size() < n_pool && !leaves.empty(); ++k) {
    const auto path = g.path(leaves[rng.below(leaves.size())]);
    const int anchor = path[rng.below(path.size())];
    const auto& similar = by_first[utf8::split_code_points(g.nodes[anchor].name).front()];
    std::vector<int> options;
    for (int id : similar) {
      if (std::find(path.begin(), path.end(), id) == path.end()) options.push_back(id);
    }
    const int node = options.empty() ? random_node() : options[rng.below(options.size())];
    pool.push_back(joined(render(g, g.path(node), rng, config, false)));
  }
  while (pool.size() < n_pool) {
    pool.push_back(joined(render(g, g.path(random_node()), rng, config, false)));
  }
  rng.shuffle(pool);
  return out;
}

void write_synthetic(const SyntheticCorpus& corpus, const Gazetteer& gazetteer,
                     const GenConfig& config, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::string hash = config_hash(config.to_json());
  const fs::path root(dir);
  write_conll(corpus.train, (root / "train.conll").string());
  write_conll(corpus.dev, (root / "dev.conll").string());
  write_conll(corpus.test, (root / "test.conll").string());
  write_lines(corpus.pool, (root / "pool.txt").string());
  Json gaz = gazetteer.to_json();
  stamp(gaz, hash);
  write_json(gaz, (root / "gazetteer.json").string());

  Json files = Json::object();
  for (const char* name : {"train.conll", "dev.conll", "test.conll", "pool.txt",
                           "gazetteer.json"}) {
    std::ifstream in(root / name, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    files[name] = sha256_hex(buf.str());
    if (std::string_view(name) != "gazetteer.json") {
      write_sidecar((root / name).string(), hash);
    }
  }
  Json manifest = {{"config", config.to_json()},
                   {"files", files},
                   {"counts",
                    {{"train", corpus.train.size()},
                     {"dev", corpus.dev.size()},
                     {"test", corpus.test.size()},
                     {"pool", corpus.pool.size()}}}};
  stamp(manifest, hash);
  write_json(manifest, (root / "manifest.json").string());
}

}  // namespace corrner
