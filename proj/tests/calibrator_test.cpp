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

#include "corrner/calibrator.hpp"
#include "corrner/error.hpp"
#include "test_support.hpp"

namespace corrner {
namespace {

using Strings = std::vector<std::string>;

Neighbor nb(std::uint32_t doc, std::initializer_list<std::pair<const char*, const char*>> spans) {
  Neighbor n{doc, {}};
  for (const auto& [surface, type] : spans) n.spans.push_back({0, 2, type, surface});
  return n;
}

const std::vector<std::string> kTypes{"PROV", "CITY", "TOWN"};

TEST(VoteTypes, MajorityFixture) {
  const std::vector<EntitySpan> pred{{0, 2, "CITY", "吉林"}};
  const std::vector<Neighbor> pool{nb(0, {{"吉林", "PROV"}}), nb(1, {{"吉林", "PROV"}}),
                                   nb(2, {{"吉林", "PROV"}}), nb(3, {{"吉林", "CITY"}})};
  CalibrationTrace trace;
  const auto out = vote_types(pred, pool, VotePolicy{}, nullptr, &trace);
  EXPECT_EQ(out[0].type, "PROV");
  ASSERT_EQ(trace.reassignments.size(), 1u);
  const auto& r = trace.reassignments[0];
  EXPECT_EQ(r.tally, (std::map<std::string, int>{{"PROV", 3}, {"CITY", 2}}));
  EXPECT_EQ(r.doc_ids, (std::vector<std::uint32_t>{0, 1, 2, 3}));
  EXPECT_EQ(r.old_type, "CITY");

  VotePolicy no_self;
  no_self.include_self_vote = false;
  CalibrationTrace t2;
  vote_types(pred, pool, no_self, nullptr, &t2);
  EXPECT_EQ(t2.reassignments[0].tally, (std::map<std::string, int>{{"PROV", 3}, {"CITY", 1}}));
}

TEST(VoteTypes, NoMatchAndTie) {
  const std::vector<EntitySpan> pred{{0, 2, "CITY", "吉林"}};
  EXPECT_EQ(vote_types(pred, std::vector{nb(0, {{"白城", "PROV"}})}, VotePolicy{}), pred);
  VotePolicy p;
  p.include_self_vote = false;
  const std::vector<Neighbor> tie{nb(0, {{"吉林", "PROV"}}), nb(1, {{"吉林", "PROV"}}),
                                  nb(2, {{"吉林", "TOWN"}}), nb(3, {{"吉林", "TOWN"}})};
  EXPECT_EQ(vote_types(pred, tie, p)[0].type, "CITY");
}

TEST(VoteTypes, MinVotes) {
  const std::vector<EntitySpan> pred{{0, 2, "CITY", "吉林"}};
  const std::vector<Neighbor> pool{nb(0, {{"吉林", "PROV"}}), nb(1, {{"吉林", "PROV"}})};
  VotePolicy p;
  p.min_votes = 3;
  EXPECT_EQ(vote_types(pred, pool, p)[0].type, "CITY");
  p.min_votes = 2;
  EXPECT_EQ(vote_types(pred, pool, p)[0].type, "PROV");
}

TEST(VoteTypes, PrefixExtension) {
  const std::vector<EntitySpan> pred{{0, 2, "PROV", "白城"}};
  const std::vector<Neighbor> pool{nb(0, {{"白城市", "CITY"}}), nb(1, {{"白城市", "CITY"}}),
                                   nb(2, {{"白城", "PROV"}})};
  VotePolicy p;
  p.match = SurfaceMatch::kPrefixExtension;
  EXPECT_EQ(vote_types(pred, pool, p)[0].type, "CITY");
  EXPECT_TRUE(surface_matches("白城", "白城市", SurfaceMatch::kPrefixExtension));
  EXPECT_FALSE(surface_matches("白城", "白城", SurfaceMatch::kPrefixExtension));
  EXPECT_FALSE(surface_matches("白城", "城市", SurfaceMatch::kPrefixExtension));
}

TEST(VoteTypes, UnknownPoolTypeWithLabels) {
  const LabelSet labels({"PROV", "CITY"}, TagScheme::kBIOES);
  const std::vector<EntitySpan> pred{{0, 2, "CITY", "吉林"}};
  EXPECT_THROW(vote_types(pred, std::vector{nb(0, {{"吉林", "POI"}})}, VotePolicy{}, &labels),
               ConfigError);
}

// The invariants, over fuzzed predictions and pools, in both match modes.
TEST(VoteTypes, FuzzedInvariants) {
  std::mt19937_64 rng(47);
  for (int i = 0; i < 1000; ++i) {
    const auto c = testing::random_vote_case(rng, kTypes);
    for (SurfaceMatch match : {SurfaceMatch::kExact, SurfaceMatch::kPrefixExtension}) {
      for (bool self : {true, false}) {
        VotePolicy p;
        p.match = match;
        p.include_self_vote = self;
        const auto out = vote_types(c.predicted, c.neighbors, p);
        ASSERT_EQ(out.size(), c.predicted.size());
        for (std::size_t k = 0; k < out.size(); ++k) {
          EXPECT_EQ(out[k].start, c.predicted[k].start);
          EXPECT_EQ(out[k].end, c.predicted[k].end);
          EXPECT_EQ(out[k].surface, c.predicted[k].surface);
          const auto tally = testing::brute_tally(c.predicted[k], c.neighbors, match);
          if (tally.size() == 1) {
            const auto& [type, count] = *tally.begin();
            if (!self || count >= 2 || type == c.predicted[k].type) EXPECT_EQ(out[k].type, type);
          }
          if (tally.empty()) EXPECT_EQ(out[k].type, c.predicted[k].type);
        }
        EXPECT_EQ(vote_types(out, c.neighbors, p), out);
        EXPECT_EQ(vote_types(c.predicted, std::vector<Neighbor>{}, p), c.predicted);
      }
    }
  }
}

TEST(VotePolicy, Json) {
  VotePolicy p;
  p.k = 7;
  p.match = SurfaceMatch::kPrefixExtension;
  const VotePolicy q = VotePolicy::from_json(p.to_json());
  EXPECT_EQ(q.k, 7u);
  EXPECT_EQ(q.match, SurfaceMatch::kPrefixExtension);
  EXPECT_THROW(VotePolicy::from_json({{"depth", 3}}), ConfigError);
  p.min_votes = 0;
  EXPECT_THROW(p.validate(), ConfigError);
}

// A model where 甲 is a province and 乙 a city, unless the pool says otherwise.
struct Fixture {
  LabelSet labels{{"PROV", "CITY"}, TagScheme::kBIOES};
  CrfModel model{labels, {FeatureTemplate::parse("unigram")}};

  Fixture() {
    for (const char* t : {"U0=甲", "U0=乙"}) model.vocabulary().add(t);
    model.allocate();
    model.emissions()(0, static_cast<Eigen::Index>(*labels.index_of("S-PROV"))) = 3.0;
    model.emissions()(1, static_cast<Eigen::Index>(*labels.index_of("S-CITY"))) = 3.0;
  }
};

std::vector<Sentence> sentences(const Strings& texts) {
  std::vector<Sentence> out;
  for (std::size_t i = 0; i < texts.size(); ++i) out.push_back({std::to_string(i), tokenize_chars(texts[i])});
  return out;
}

TEST(CalibrateBatch, EmptyPoolIsTagging) {
  Fixture f;
  const Index empty = build_index(Strings{});
  const auto sents = sentences({"甲乙", "乙丙甲", "丙"});
  const auto batch = calibrate_batch(f.model, empty, sents, VotePolicy{});
  const auto tagged = tag(f.model, sents);
  for (std::size_t i = 0; i < sents.size(); ++i) EXPECT_EQ(batch.items[i].tags, tagged[i].tags);
  EXPECT_EQ(batch.reassigned, 0u);
}

TEST(CalibrateBatch, CountsMatchTraces) {
  Fixture f;
  const Index index = build_index(Strings{"甲丙", "甲丁", "乙丙"});
  const auto sents = sentences({"甲乙", "乙", "丁甲"});
  VotePolicy p;
  p.k = 10;
  const auto a = calibrate_batch(f.model, index, sents, p);
  const auto b = calibrate_batch(f.model, index, sents, p);
  std::size_t total = 0;
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    total += a.items[i].trace.reassignments.size();
    EXPECT_EQ(a.items[i].tags, b.items[i].tags);
    EXPECT_EQ(a.items[i].trace.reassignments.size(), b.items[i].trace.reassignments.size());
  }
  EXPECT_EQ(total, a.reassigned);
  EXPECT_GT(a.spans, 0u);
  EXPECT_LE(a.reassigned_fraction(), 1.0);
}

TEST(Calibrate, KZeroIsIdentity) {
  Fixture f;
  const Index index = build_index(Strings{"甲乙", "乙甲"});
  VotePolicy p;
  p.k = 0;
  for (const auto& s : sentences({"甲乙", "乙乙甲"})) {
    const Calibrated c = calibrate(f.model, index, s, p);
    EXPECT_EQ(c.spans, c.base);
    EXPECT_EQ(c.tags, tag_one(f.model, s).tags);
  }
}

TEST(Calibrate, VotesFlipType) {
  // The pool model tags 乙 as a city everywhere; a biased model reads the
  // query's 乙 as a province, and voting flips it back.
  Fixture g;
  const Index index = build_index(Strings{"乙丙", "丙乙", "乙"});
  CrfModel biased = g.model;
  biased.emissions()(1, static_cast<Eigen::Index>(*g.labels.index_of("S-PROV"))) = 3.5;
  const PoolTagger pool(g.model, index);
  const Sentence s{"q", {"乙"}};
  const auto base = tag_one(biased, s).spans;
  ASSERT_EQ(base.at(0).type, "PROV");
  VotePolicy p;
  p.k = 5;
  const auto r = retrieve_topk(index, s.text(), p.k);
  const Calibrated c = calibrate(pool, s, base, r, p);
  EXPECT_EQ(c.spans.at(0).type, "CITY");
  EXPECT_EQ(c.tags, (Strings{"S-CITY"}));
  EXPECT_EQ(c.trace.reassignments.size(), 1u);
}

TEST(PoolTagger, MemoizationSavesDecodes) {
  Fixture f;
  // 10 distinct texts, each repeated 5 times.
  Strings docs;
  for (int i = 0; i < 50; ++i) docs.push_back("甲乙" + std::to_string(i % 10));
  IndexOptions o;
  const Index index = build_index(docs, o);
  const PoolTagger memo(f.model, index, true), plain(f.model, index, false);
  for (int rep = 0; rep < 3; ++rep) {
    for (std::uint32_t d = 0; d < 50; ++d) {
      EXPECT_EQ(*memo.spans(d), *plain.spans(d));
    }
  }
  EXPECT_EQ(memo.tagged_count(), 10u);
  EXPECT_EQ(plain.tagged_count(), 150u);
}

}  // namespace
}  // namespace corrner
