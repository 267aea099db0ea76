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

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <set>

#include "corrner/error.hpp"
#include "corrner/metrics.hpp"
#include "corrner/synthgen.hpp"
#include "corrner/tagger.hpp"
#include "test_support.hpp"

namespace corrner {
namespace {

GenConfig small_config() {
  GenConfig c;
  c.sizes = {8, 3, 2, 2, 2};
  c.n_train = 150;
  c.n_dev = 30;
  c.n_test = 60;
  c.n_pool = 3000;
  return c;
}

std::set<std::string> intersect(const std::vector<std::string>& a,
                                const std::vector<std::string>& b) {
  std::set<std::string> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

TEST(Gazetteer, DeterministicPerSeed) {
  const GenConfig c = small_config();
  EXPECT_EQ(generate_gazetteer(c).to_json().dump(), generate_gazetteer(c).to_json().dump());
  GenConfig other = c;
  other.seed = 8;
  EXPECT_NE(generate_gazetteer(other).to_json().dump(), generate_gazetteer(c).to_json().dump());
}

TEST(Gazetteer, ForestAndLevels) {
  const Gazetteer g = generate_gazetteer(GenConfig{});
  for (std::size_t id = 0; id < g.nodes.size(); ++id) {
    const auto& n = g.nodes[id];
    if (n.level == 0) {
      EXPECT_EQ(n.parent, -1);
    } else {
      ASSERT_GE(n.parent, 0);
      ASSERT_LT(static_cast<std::size_t>(n.parent), id);
      EXPECT_EQ(g.nodes[static_cast<std::size_t>(n.parent)].level, n.level - 1);
    }
    EXPECT_FALSE(n.suffix.empty());
  }
  EXPECT_EQ(g.by_level[0].size(), 20u);
  EXPECT_EQ(g.by_level[1].size(), 80u);
  EXPECT_TRUE(Gazetteer::from_json(g.to_json()).to_json() == g.to_json());
}

TEST(Gazetteer, AmbiguityCounts) {
  const Gazetteer g = generate_gazetteer(GenConfig{});
  // 0.25 of 20 provinces = 5 shared PROV/CITY names.
  const auto shared = intersect(g.inventory(0), g.inventory(1));
  EXPECT_GE(shared.size(), 4u);
  EXPECT_LE(shared.size(), 6u);
  std::set<std::pair<std::string, int>> declared;
  for (const auto& s : g.shared) declared.insert({s.name, s.upper_level});
  for (int a = 0; a < kLevels; ++a) {
    for (int b = a + 1; b < kLevels; ++b) {
      for (const auto& name : intersect(g.inventory(a), g.inventory(b))) {
        EXPECT_EQ(b, a + 1) << name;
        EXPECT_TRUE(declared.count({name, a})) << name;
      }
    }
  }
  for (const auto& s : g.shared) {
    const auto upper = g.inventory(s.upper_level), lower = g.inventory(s.upper_level + 1);
    EXPECT_TRUE(std::binary_search(upper.begin(), upper.end(), s.name));
    EXPECT_TRUE(std::binary_search(lower.begin(), lower.end(), s.name));
  }

  GenConfig none;
  none.ambiguity_rate = 0.0;
  const Gazetteer plain = generate_gazetteer(none);
  EXPECT_TRUE(plain.shared.empty());
  for (int a = 0; a + 1 < kLevels; ++a) {
    EXPECT_TRUE(intersect(plain.inventory(a), plain.inventory(a + 1)).empty());
  }
}

TEST(Gazetteer, TooManySharedNames) {
  GenConfig c;
  c.sizes = {4, 1, 1, 1, 1};
  c.ambiguity_rate = 1.0;
  EXPECT_THROW(generate_gazetteer(c), ConfigError);
}

TEST(GenConfig, Validation) {
  GenConfig c;
  c.suffix_drop_rate = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.sizes[2] = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(GenConfig::from_json({{"noise", 1}}), ConfigError);
  EXPECT_EQ(GenConfig::from_json(GenConfig{}.to_json()).to_json(), GenConfig{}.to_json());
}

TEST(Corpus, DeterministicAndSized) {
  const GenConfig c = small_config();
  const Gazetteer g = generate_gazetteer(c);
  const SyntheticCorpus a = generate_corpus(g, c), b = generate_corpus(g, c);
  EXPECT_EQ(a.pool, b.pool);
  ASSERT_EQ(a.test.size(), 60u);
  for (std::size_t i = 0; i < a.test.size(); ++i) EXPECT_EQ(a.test[i].tags, b.test[i].tags);
  EXPECT_EQ(a.train.size(), 150u);
  EXPECT_EQ(a.dev.size(), 30u);
  EXPECT_EQ(a.pool.size(), 3000u);
  EXPECT_EQ(a.test_paths.size(), a.test.size());
}

TEST(Corpus, SplitHygieneAndValidTags) {
  const GenConfig c = small_config();
  const SyntheticCorpus s = generate_corpus(generate_gazetteer(c), c);
  std::set<std::string> seen;
  for (const auto* split : {&s.train, &s.dev, &s.test}) {
    for (const auto& x : *split) {
      EXPECT_TRUE(seen.insert(x.sentence.text()).second) << x.sentence.text();
      EXPECT_NO_THROW(decode_spans(x.tags, TagScheme::kBIOES, DecodeMode::kStrict));
      for (const auto& t : x.tags) EXPECT_TRUE(s.labels.index_of(t).has_value()) << t;
    }
  }
}

TEST(Corpus, FullRenderingOfEveryTestPathInPool) {
  const GenConfig c = small_config();
  const Gazetteer g = generate_gazetteer(c);
  const SyntheticCorpus s = generate_corpus(g, c);
  for (std::size_t i = 0; i < s.test.size(); ++i) {
    const auto path = g.path(s.test_paths[i]);
    const bool found = std::any_of(s.pool.begin(), s.pool.end(), [&](const std::string& doc) {
      std::size_t at = 0;
      for (int node : path) {
        at = doc.find(g.nodes[static_cast<std::size_t>(node)].full(), at);
        if (at == std::string::npos) return false;
      }
      return true;
    });
    EXPECT_TRUE(found) << s.test[i].sentence.text();
  }
}

TEST(Corpus, SuffixlessSharedNamesHaveExtendedForms) {
  const GenConfig c = small_config();
  const Gazetteer g = generate_gazetteer(c);
  const SyntheticCorpus s = generate_corpus(g, c);
  std::set<std::string> shared;
  for (const auto& x : g.shared) shared.insert(x.name);
  std::size_t checked = 0;
  for (std::size_t i = 0; i < s.test.size(); ++i) {
    const auto& t = s.test[i];
    for (const auto& sp : decode_spans(t.sentence.tokens, t.tags, TagScheme::kBIOES,
                                       DecodeMode::kStrict)) {
      if (!shared.count(sp.surface)) continue;
      ++checked;
      const bool extended = std::any_of(s.pool.begin(), s.pool.end(), [&](const std::string& doc) {
        for (std::size_t at = doc.find(sp.surface); at != std::string::npos;
             at = doc.find(sp.surface, at + 1)) {
          if (at + sp.surface.size() < doc.size()) return true;
        }
        return false;
      });
      EXPECT_TRUE(extended) << sp.surface;
    }
  }
  EXPECT_GT(checked, 0u);
}

TEST(Corpus, NoSuffixDropMeansSuffixedEntities) {
  GenConfig c = small_config();
  c.suffix_drop_rate = 0.0;
  const Gazetteer g = generate_gazetteer(c);
  std::set<std::string> fulls;
  for (const auto& n : g.nodes) fulls.insert(n.full());
  const SyntheticCorpus s = generate_corpus(g, c);
  for (const auto& t : s.train) {
    for (const auto& sp : decode_spans(t.sentence.tokens, t.tags, TagScheme::kBIOES,
                                       DecodeMode::kStrict)) {
      EXPECT_TRUE(fulls.count(sp.surface)) << sp.surface;
    }
  }
}

TEST(Corpus, NoSuffixDropIsNearCeilingForPlainCrf) {
  GenConfig c = small_config();
  c.suffix_drop_rate = 0.0;
  c.n_train = 400;
  const SyntheticCorpus s = generate_corpus(generate_gazetteer(c), c);
  TrainConfig tc;
  tc.learning_rate = 0.02;
  tc.epochs = 15;
  const CrfModel m = train({s.train, {}}, {s.dev, {}}, tc, s.labels, default_templates());
  std::vector<std::vector<EntitySpan>> gold, pred;
  for (const auto& t : s.test) {
    gold.push_back(decode_spans(t.sentence.tokens, t.tags, TagScheme::kBIOES, DecodeMode::kStrict));
    pred.push_back(tag_one(m, t.sentence).spans);
  }
  EXPECT_GE(entity_prf(gold, pred).micro().f1, 0.97);
}

TEST(Corpus, PoolTooSmallForGuarantee) {
  GenConfig c = small_config();
  c.n_pool = 100;
  EXPECT_THROW(generate_corpus(generate_gazetteer(c), c), ConfigError);
  c.guarantee_correlated = false;
  EXPECT_NO_THROW(generate_corpus(generate_gazetteer(c), c));
}

TEST(WriteSynthetic, FilesAndManifest) {
  const GenConfig c = small_config();
  const Gazetteer g = generate_gazetteer(c);
  const SyntheticCorpus s = generate_corpus(g, c);
  testing::TempDir dir("synth");
  write_synthetic(s, g, c, dir.str());
  const Json manifest = read_json(dir / "manifest.json");
  EXPECT_EQ(manifest.at("config_hash"), config_hash(c.to_json()));
  EXPECT_EQ(read_conll(dir / "test.conll").size(), s.test.size());
  EXPECT_EQ(read_lines(dir / "pool.txt"), s.pool);
  EXPECT_TRUE(artifact_current(dir / "train.conll", config_hash(c.to_json())));
  EXPECT_EQ(Gazetteer::from_json(read_json(dir / "gazetteer.json")).to_json(), g.to_json());
}

}  // namespace
}  // namespace corrner
