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

#include "corrner/metrics.hpp"

#include <algorithm>
#include <tuple>

#include "corrner/error.hpp"

namespace corrner {

Prf prf_from_counts(std::size_t correct, std::size_t pred, std::size_t gold) {
  Prf out;
  out.precision = pred == 0 ? 0.0 : static_cast<double>(correct) / pred;
  out.recall = gold == 0 ? 0.0 : static_cast<double>(correct) / gold;
  const double sum = out.precision + out.recall;
  out.f1 = sum == 0.0 ? 0.0 : 2.0 * out.precision * out.recall / sum;
  return out;
}

EvalReport entity_prf(std::span<const std::vector<EntitySpan>> gold,
                      std::span<const std::vector<EntitySpan>> pred) {
  if (gold.size() != pred.size()) {
    throw LengthMismatchError(std::min(gold.size(), pred.size()),
                              "gold has " + std::to_string(gold.size()) +
                                  " sentences, prediction has " +
                                  std::to_string(pred.size()));
  }
  using Key = std::tuple<std::size_t, std::size_t, std::string>;
  EvalReport report;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    std::vector<Key> g, p;
    for (const auto& e : gold[s]) {
      g.emplace_back(e.start, e.end, e.type);
      ++report.per_type[e.type].gold;
    }
    for (const auto& e : pred[s]) {
      p.emplace_back(e.start, e.end, e.type);
      ++report.per_type[e.type].pred;
    }
    std::sort(g.begin(), g.end());
    std::sort(p.begin(), p.end());
    std::vector<Key> hits;
    std::set_intersection(g.begin(), g.end(), p.begin(), p.end(),
                          std::back_inserter(hits));
    for (const auto& h : hits) ++report.per_type[std::get<2>(h)].correct;
  }

  std::size_t gold_types = 0;
  for (auto& [type, c] : report.per_type) {
    c.prf = prf_from_counts(c.correct, c.pred, c.gold);
    report.total.gold += c.gold;
    report.total.pred += c.pred;
    report.total.correct += c.correct;
    if (c.gold == 0) continue;
    ++gold_types;
    report.macro.precision += c.prf.precision;
    report.macro.recall += c.prf.recall;
    report.macro.f1 += c.prf.f1;
  }
  report.total.prf =
      prf_from_counts(report.total.correct, report.total.pred, report.total.gold);
  if (gold_types > 0) {
    report.macro.precision /= gold_types;
    report.macro.recall /= gold_types;
    report.macro.f1 /= gold_types;
  }
  return report;
}

namespace {

Json prf_json(const Prf& p) {
  return {{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}};
}

}  // namespace

Json to_json(const EvalReport& report) {
  Json types = Json::object();
  for (const auto& [type, c] : report.per_type) {
    Json row = prf_json(c.prf);
    row["gold"] = c.gold;
    row["pred"] = c.pred;
    row["correct"] = c.correct;
    types[type] = row;
  }
  Json micro = prf_json(report.total.prf);
  micro["gold"] = report.total.gold;
  micro["pred"] = report.total.pred;
  micro["correct"] = report.total.correct;
  return {{"per_type", types},
          {"micro", micro},
          {"macro", prf_json(report.macro)},
          {"metadata", report.metadata}};
}

}  // namespace corrner
