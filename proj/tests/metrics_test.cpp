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
#include <cmath>
#include <numeric>

#include "corrner/error.hpp"
#include "corrner/metrics.hpp"
#include "corrner/stats.hpp"
#include "test_support.hpp"

namespace corrner {
namespace {

TEST(EntityPrf, HandCountedFixtures) {
  for (const auto& f : testing::metric_fixtures()) {
    SCOPED_TRACE(f.name);
    const EvalReport r = entity_prf(f.gold, f.pred);
    EXPECT_DOUBLE_EQ(r.micro().precision, f.micro_p);
    EXPECT_DOUBLE_EQ(r.micro().recall, f.micro_r);
    EXPECT_DOUBLE_EQ(r.micro().f1, f.micro_f1);
    EXPECT_DOUBLE_EQ(r.macro.precision, f.macro_p);
    EXPECT_DOUBLE_EQ(r.macro.recall, f.macro_r);
    EXPECT_DOUBLE_EQ(r.macro.f1, f.macro_f1);
    std::size_t gold_rows = 0;
    for (const auto& [type, c] : r.per_type) gold_rows += c.gold > 0;
    EXPECT_EQ(gold_rows, f.macro_types.size());
  }
}

TEST(EntityPrf, PerTypeOfTypeMissFixture) {
  const auto f = testing::metric_fixtures().front();
  const EvalReport r = entity_prf(f.gold, f.pred);
  EXPECT_DOUBLE_EQ(r.per_type.at("CITY").prf.precision, 0.5);
  EXPECT_DOUBLE_EQ(r.per_type.at("CITY").prf.recall, 1.0);
  EXPECT_DOUBLE_EQ(r.per_type.at("CITY").prf.f1, 2.0 / 3.0);
  EXPECT_EQ(r.per_type.at("PROV").prf.f1, 0.0);
}

TEST(EntityPrf, LengthMismatch) {
  const std::vector<std::vector<EntitySpan>> gold(3), pred(2);
  try {
    entity_prf(gold, pred);
    FAIL();
  } catch (const LengthMismatchError& e) {
    EXPECT_EQ(e.sentence_index(), 2u);
  }
}

TEST(EntityPrf, PermutationInvariant) {
  std::mt19937_64 rng(53);
  const std::vector<std::string> types{"A", "B", "C"};
  for (int i = 0; i < 50; ++i) {
    std::vector<std::vector<EntitySpan>> gold, pred;
    for (int s = 0; s < 12; ++s) {
      gold.push_back(testing::random_spans(rng, 10, types));
      pred.push_back(testing::random_spans(rng, 10, types));
    }
    const double f1 = entity_prf(gold, pred).micro().f1;
    std::vector<std::size_t> order(gold.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<EntitySpan>> g2, p2;
    for (std::size_t k : order) {
      g2.push_back(gold[k]);
      p2.push_back(pred[k]);
    }
    EXPECT_DOUBLE_EQ(entity_prf(g2, p2).micro().f1, f1);
  }
}

TEST(EntityPrf, JsonShape) {
  const auto f = testing::metric_fixtures().front();
  const Json j = to_json(entity_prf(f.gold, f.pred));
  EXPECT_DOUBLE_EQ(j.at("micro").at("f1").get<double>(), 0.5);
  EXPECT_EQ(j.at("per_type").at("CITY").at("pred").get<int>(), 2);
}

// Reference values from scipy.stats / scipy.special.
TEST(Stats, IncompleteBeta) {
  EXPECT_NEAR(incomplete_beta(0.5, 0.5, 0.3), 0.36901011956554536, 1e-12);
  EXPECT_NEAR(incomplete_beta(2, 3, 0.4), 0.5248, 1e-12);
  EXPECT_NEAR(incomplete_beta(10, 0.5, 0.95), 0.317151575465545, 1e-12);
  EXPECT_NEAR(incomplete_beta(1.5, 50, 0.01), 0.2011758871448742, 1e-12);
  EXPECT_EQ(incomplete_beta(2, 3, 0.0), 0.0);
  EXPECT_EQ(incomplete_beta(2, 3, 1.0), 1.0);
}

TEST(Stats, StudentT) {
  EXPECT_NEAR(student_t_two_tailed(0.5, 3), 0.651447964848151, 1e-12);
  EXPECT_NEAR(student_t_two_tailed(2.0, 7), 0.08561932856297597, 1e-12);
  EXPECT_NEAR(student_t_two_tailed(10.0, 1), 0.06345103486110712, 1e-12);
  EXPECT_NEAR(student_t_two_tailed(1.96, 1000), 0.05027318495574871, 1e-12);
  EXPECT_NEAR(student_t_two_tailed(-2.0, 7), student_t_two_tailed(2.0, 7), 1e-15);
}

TEST(PairedTTest, Examples) {
  const std::vector<double> d{1, 2, 3, 4}, zero(4, 0.0);
  const TTest t = paired_ttest(d, zero);
  EXPECT_NEAR(t.t, 3.872983346207417, 1e-12);
  EXPECT_EQ(t.df, 3.0);
  EXPECT_NEAR(t.p, 0.030466291662170977, 1e-12);
  EXPECT_DOUBLE_EQ(t.mean_diff, 2.5);

  const std::vector<double> a{0.91, 0.93, 0.92, 0.95, 0.90}, b{0.90, 0.91, 0.92, 0.93, 0.89};
  EXPECT_NEAR(paired_ttest(a, b).p, 0.03267792333680285, 1e-10);
  const std::vector<double> c{0.5, 0.4, 0.45}, e{0.52, 0.47, 0.44};
  EXPECT_NEAR(paired_ttest(c, e).t, -1.1428571428571432, 1e-10);
  EXPECT_NEAR(paired_ttest(c, e).p, 0.371460638945291, 1e-10);
}

TEST(PairedTTest, Conventions) {
  const std::vector<double> a{0.25, 0.5, 0.75};
  EXPECT_EQ(paired_ttest(a, a).p, 1.0);
  const std::vector<double> shifted{0.5, 0.75, 1.0};
  const TTest t = paired_ttest(shifted, a);
  EXPECT_EQ(t.p, 0.0);
  EXPECT_TRUE(std::isinf(t.t));
  EXPECT_THROW(paired_ttest(std::vector<double>{1.0}, std::vector<double>{2.0}), ConfigError);
  EXPECT_THROW(paired_ttest(a, std::vector<double>{1.0, 2.0}), ConfigError);
}

TEST(PairedTTest, SymmetricUpToSign) {
  std::mt19937_64 rng(59);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> a, b;
    for (int k = 0; k < 8; ++k) {
      a.push_back(n(rng));
      b.push_back(n(rng));
    }
    const TTest ab = paired_ttest(a, b), ba = paired_ttest(b, a);
    EXPECT_DOUBLE_EQ(ab.p, ba.p);
    EXPECT_DOUBLE_EQ(ab.t, -ba.t);
  }
}

TEST(Stats, MeanStddev) {
  const std::vector<double> x{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(mean(x), 2.5);
  EXPECT_NEAR(stddev(x), std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_EQ(stddev(std::vector<double>{1.0}), 0.0);
}

}  // namespace
}  // namespace corrner
