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

#include <filesystem>
#include <fstream>

#include "corrner/error.hpp"
#include "corrner/retriever.hpp"
#include "test_support.hpp"

namespace corrner {
namespace {

using Terms = std::vector<std::string>;

TEST(Analyze, Examples) {
  EXPECT_EQ(analyze("吉林省A1路"), (Terms{"吉", "林", "省", "a1", "路"}));
  EXPECT_TRUE(analyze("").empty());
  EXPECT_EQ(analyze("Nike-Air 运动鞋"), (Terms{"nike", "air", "运", "动", "鞋"}));
}

TEST(BuildIndex, CountsAndEmpty) {
  const Index empty = build_index(std::vector<std::string>{});
  EXPECT_EQ(empty.doc_count(), 0u);
  EXPECT_TRUE(retrieve_topk(empty, "a", 5).hits.empty());

  const Index idx = build_index(std::vector<std::string>{"a b", "a"});
  EXPECT_EQ(idx.df("a"), 2u);
  EXPECT_EQ(idx.df("b"), 1u);
  EXPECT_DOUBLE_EQ(idx.avg_doc_len(), 1.5);
  EXPECT_TRUE(idx == build_index(std::vector<std::string>{"a b", "a"}));
}

TEST(BuildIndex, TruncatesLongDocs) {
  IndexOptions o;
  o.max_doc_length = 3;
  const Index idx = build_index(std::vector<std::string>{"吉林省白城市"}, o);
  EXPECT_EQ(idx.doc_len(0), 3u);
  EXPECT_EQ(idx.df("白"), 0u);
}

TEST(Bm25, WorkedExample) {
  const Index idx = build_index(std::vector<std::string>{"a b a"});
  const double s = bm25_score(idx, Terms{"a"}, 0);
  EXPECT_NEAR(s, 0.39556284962119864, 1e-12);
  EXPECT_DOUBLE_EQ(bm25_score(idx, Terms{"a", "a"}, 0), s);
  EXPECT_EQ(bm25_score(idx, Terms{"zzz"}, 0), 0.0);
  EXPECT_THROW(bm25_score(idx, Terms{"a"}, 3), DataError);
}

TEST(Bm25, MonotoneInTfAntiMonotoneInDf) {
  const Index base = build_index(std::vector<std::string>{"a b c d", "b c", "c d"});
  const Index more_tf = build_index(std::vector<std::string>{"a a c d", "b c", "c d"});
  const Index more_df = build_index(std::vector<std::string>{"a b c d", "a c", "c d"});
  const double s = bm25_score(base, Terms{"a"}, 0);
  EXPECT_GT(bm25_score(more_tf, Terms{"a"}, 0), s);
  EXPECT_LT(bm25_score(more_df, Terms{"a"}, 0), s);
}

TEST(Bm25, ZeroBRemovesLengthDependence) {
  IndexOptions o;
  o.params.b = 0.0;
  const Index idx = build_index(std::vector<std::string>{"a b", "a b c d e f"}, o);
  EXPECT_DOUBLE_EQ(bm25_score(idx, Terms{"a"}, 0), bm25_score(idx, Terms{"a"}, 1));
}

TEST(Bm25, ParamsValidated) {
  Bm25Params p;
  p.b = 1.5;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.k1 = -1.0;
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(RetrieveTopk, MatchesBruteForce) {
  std::mt19937_64 rng(3);
  std::vector<std::string> docs;
  for (int i = 0; i < 1000; ++i) docs.push_back(testing::random_text(rng, 1, 12));
  const Index idx = build_index(docs);
  const testing::Bm25Oracle oracle(docs, 1.2, 0.75);
  for (int q = 0; q < 50; ++q) {
    const std::string query = testing::random_text(rng, 1, 6);
    const std::size_t k = 1 + rng() % 40;
    const auto got = retrieve_topk(idx, query, k);
    const auto want = oracle.topk(query, k);
    ASSERT_EQ(got.hits.size(), want.size()) << query;
    for (std::size_t i = 0; i < want.size(); ++i) {
      EXPECT_EQ(got.hits[i].doc_id, want[i].doc) << query << " rank " << i;
      EXPECT_NEAR(got.hits[i].score, want[i].score, 1e-9);
      EXPECT_EQ(got.hits[i].text, docs[want[i].doc]);
    }
  }
}

TEST(RetrieveTopk, EdgeCases) {
  const Index idx = build_index(std::vector<std::string>{"吉林省", "吉林市", "白城"});
  EXPECT_TRUE(retrieve_topk(idx, "吉林", 0).hits.empty());
  EXPECT_TRUE(retrieve_topk(idx, "zzz 黑", 5).hits.empty());
  RetrieveOptions o;
  o.exclude_verbatim_query = true;
  for (const auto& h : retrieve_topk(idx, "吉林省", 5, o).hits) EXPECT_NE(h.text, "吉林省");
  EXPECT_EQ(retrieve_topk(idx, "吉林省", 5).hits.front().text, "吉林省");
}

TEST(RetrieveTopk, TiesByDocId) {
  const Index idx = build_index(std::vector<std::string>{"x y", "x z", "x w"});
  const auto r = retrieve_topk(idx, "x", 2);
  ASSERT_EQ(r.hits.size(), 2u);
  EXPECT_EQ(r.hits[0].doc_id, 0u);
  EXPECT_EQ(r.hits[1].doc_id, 1u);
}

TEST(IndexIo, RoundTripAndByteIdenticalResave) {
  std::mt19937_64 rng(5);
  std::vector<std::string> docs;
  for (int i = 0; i < 300; ++i) docs.push_back(testing::random_text(rng, 1, 10));
  const Index idx = build_index(docs);
  testing::TempDir dir("index");
  save_index(idx, dir / "a", "h1");
  const Index back = load_index(dir / "a");
  EXPECT_TRUE(back == idx);
  for (int q = 0; q < 20; ++q) {
    const std::string query = testing::random_text(rng, 1, 5);
    const auto x = retrieve_topk(idx, query, 10);
    const auto y = retrieve_topk(back, query, 10);
    ASSERT_EQ(x.hits.size(), y.hits.size());
    for (std::size_t i = 0; i < x.hits.size(); ++i) {
      EXPECT_EQ(x.hits[i].doc_id, y.hits[i].doc_id);
      EXPECT_EQ(x.hits[i].score, y.hits[i].score);
    }
  }
  save_index(back, dir / "b", "h1");
  for (const char* f : {"meta.json", "postings.bin", "docs.txt"}) {
    std::ifstream a(dir / (std::string("a/") + f), std::ios::binary);
    std::ifstream b(dir / (std::string("b/") + f), std::ios::binary);
    EXPECT_EQ(std::string(std::istreambuf_iterator<char>(a), {}),
              std::string(std::istreambuf_iterator<char>(b), {}))
        << f;
  }
}

TEST(IndexIo, MissingPostingsIsLoadError) {
  const Index idx = build_index(std::vector<std::string>{"a"});
  testing::TempDir dir("index");
  save_index(idx, dir / "i");
  std::filesystem::remove(dir / "i/postings.bin");
  EXPECT_THROW(load_index(dir / "i"), IndexLoadError);
}

TEST(IndexIo, AnalyzerVersionMismatch) {
  const Index idx = build_index(std::vector<std::string>{"a"});
  testing::TempDir dir("index");
  save_index(idx, dir / "i");
  Json meta = read_json(dir / "i/meta.json");
  meta["analyzer_version"] = "other-0";
  write_json(meta, dir / "i/meta.json");
  EXPECT_THROW(
      {
        const Index bad = load_index(dir / "i");
        retrieve_topk(bad, "a", 1);
      },
      VersionMismatchError);
}

TEST(IndexBuilder, CollapsesDuplicates) {
  IndexOptions o;
  o.collapse_duplicates = true;
  const Index idx = build_index(std::vector<std::string>{"a", "a", "b"}, o);
  EXPECT_EQ(idx.doc_count(), 2u);
}

}  // namespace
}  // namespace corrner
