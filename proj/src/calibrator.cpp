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

#include "corrner/calibrator.hpp"

#include <algorithm>

#include "corrner/error.hpp"
#include "corrner/parallel.hpp"

namespace corrner {

void VotePolicy::validate() const {
  if (min_votes < 1) throw ConfigError("min_votes must be >= 1");
}

Json VotePolicy::to_json() const {
  return {{"k", k},
          {"match", to_string(match)},
          {"include_self_vote", include_self_vote},
          {"min_votes", min_votes},
          {"exclude_verbatim_query", exclude_verbatim_query},
          {"memoize", memoize}};
}

VotePolicy VotePolicy::from_json(const Json& j) {
  check_keys(j, {"k", "match", "include_self_vote", "min_votes", "exclude_verbatim_query",
                 "memoize"},
             "policy");
  VotePolicy p;
  p.k = get_or(j, "k", p.k);
  p.match = parse_surface_match(get_or(j, "match", std::string(to_string(p.match))));
  p.include_self_vote = get_or(j, "include_self_vote", p.include_self_vote);
  p.min_votes = get_or(j, "min_votes", p.min_votes);
  p.exclude_verbatim_query = get_or(j, "exclude_verbatim_query", p.exclude_verbatim_query);
  p.memoize = get_or(j, "memoize", p.memoize);
  p.validate();
  return p;
}

bool surface_matches(std::string_view query, std::string_view pool, SurfaceMatch match) {
  if (match == SurfaceMatch::kExact) return query == pool;
  return pool.size() > query.size() && pool.starts_with(query);
}

std::vector<EntitySpan> vote_types(std::span<const EntitySpan> predicted,
                                   std::span<const Neighbor> neighbors,
                                   const VotePolicy& policy, const LabelSet* labels,
                                   CalibrationTrace* trace) {
  if (labels != nullptr) {
    for (const auto& n : neighbors) {
      for (const auto& s : n.spans) {
        if (!labels->has_type(s.type)) {
          throw ConfigError("pool prediction type '" + s.type +
                            "' is unknown to the model's label set");
        }
      }
    }
  }
  std::vector<EntitySpan> out(predicted.begin(), predicted.end());
  for (auto& span : out) {
    std::map<std::string, int> tally;
    std::vector<std::uint32_t> docs;
    int matched = 0;
    for (const auto& n : neighbors) {
      bool hit = false;
      for (const auto& s : n.spans) {
        if (!surface_matches(span.surface, s.surface, policy.match)) continue;
        ++tally[s.type];
        ++matched;
        hit = true;
      }
      if (hit) docs.push_back(n.doc_id);
    }
    if (matched == 0) continue;
    if (policy.include_self_vote) ++tally[span.type];

    std::string winner;
    int top = -1;
    bool tie = false;
    for (const auto& [type, count] : tally) {
      if (count > top) {
        top = count;
        winner = type;
        tie = false;
      } else if (count == top) {
        tie = true;
      }
    }
    // The winner differs from the current type here, so its count excludes the self vote.
    if (tie || winner == span.type || top < policy.min_votes) continue;
    if (trace != nullptr) {
      trace->reassignments.push_back(
          {span.start, span.end, span.surface, span.type, winner, tally, docs});
    }
    span.type = winner;
  }
  return out;
}

Calibrated calibrate(const PoolTagger& pool, const Sentence& sentence,
                     std::vector<EntitySpan> base, const RetrievalResult& retrieval,
                     const VotePolicy& policy) {
  policy.validate();
  std::vector<Neighbor> neighbors;
  neighbors.reserve(retrieval.hits.size());
  for (const auto& hit : retrieval.hits) {
    neighbors.push_back({hit.doc_id, *pool.spans(hit.doc_id)});
  }
  Calibrated out;
  out.trace.sentence_id = sentence.id;
  out.spans = vote_types(base, neighbors, policy, &pool.model().labels(), &out.trace);
  out.base = std::move(base);
  out.tags = encode_tags(out.spans, sentence.tokens.size(), pool.model().labels().scheme());
  return out;
}

Calibrated calibrate(const PoolTagger& pool, const Sentence& sentence,
                     const VotePolicy& policy) {
  if (pool.model().uses_correlation()) {
    throw ConfigError("calibration needs a plain model, not a correlation-augmented one");
  }
  auto base = sentence.tokens.empty() ? std::vector<EntitySpan>{}
                                      : tag_one(pool.model(), sentence).spans;
  RetrieveOptions options;
  options.query_id = sentence.id;
  options.exclude_verbatim_query = policy.exclude_verbatim_query;
  const auto retrieval = retrieve_topk(pool.index(), sentence.text(), policy.k, options);
  return calibrate(pool, sentence, std::move(base), retrieval, policy);
}

Calibrated calibrate(const CrfModel& model, const Index& index, const Sentence& sentence,
                     const VotePolicy& policy) {
  const PoolTagger pool(model, index, policy.memoize);
  return calibrate(pool, sentence, policy);
}

Json BatchCalibration::stats_json() const {
  Json m = Json::array();
  for (const auto& [key, count] : matrix) {
    m.push_back({{"from", key.first}, {"to", key.second}, {"count", count}});
  }
  Json errs = Json::array();
  for (const auto& [i, msg] : errors) errs.push_back({{"sentence", i}, {"error", msg}});
  return {{"spans", spans},
          {"reassigned", reassigned},
          {"reassigned_fraction", reassigned_fraction()},
          {"matrix", m},
          {"errors", errs}};
}

BatchCalibration calibrate_batch(const CrfModel& model, const Index& index,
                                 std::span<const Sentence> sentences,
                                 const VotePolicy& policy) {
  policy.validate();
  const PoolTagger pool(model, index, policy.memoize);
  BatchCalibration out;
  out.items.resize(sentences.size());
  std::vector<std::string> failures(sentences.size());
  parallel_for(sentences.size(), [&](std::size_t i) {
    try {
      out.items[i] = calibrate(pool, sentences[i], policy);
    } catch (const Error& e) {
      failures[i] = e.what();
      out.items[i].trace.sentence_id = sentences[i].id;
      out.items[i].tags.assign(sentences[i].tokens.size(), "O");
    }
  });
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (!failures[i].empty()) out.errors.emplace_back(i, failures[i]);
    out.spans += out.items[i].spans.size();
    for (const auto& r : out.items[i].trace.reassignments) {
      ++out.reassigned;
      ++out.matrix[{r.old_type, r.new_type}];
    }
  }
  return out;
}

Json to_json(const Reassignment& r, const std::string& sentence_id) {
  return {{"sentence_id", sentence_id}, {"start", r.start},
          {"end", r.end},               {"surface", r.surface},
          {"old_type", r.old_type},     {"new_type", r.new_type},
          {"tally", r.tally},           {"doc_ids", r.doc_ids}};
}

}  // namespace corrner
