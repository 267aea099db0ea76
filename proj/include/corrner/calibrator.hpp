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

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "corrner/config.hpp"
#include "corrner/corpus.hpp"
#include "corrner/correlator.hpp"
#include "corrner/pool_tagger.hpp"
#include "corrner/retriever.hpp"
#include "corrner/tagger.hpp"

namespace corrner {

struct VotePolicy {
  std::size_t k = 100;  // retrieval depth
  SurfaceMatch match = SurfaceMatch::kExact;
  bool include_self_vote = true;
  int min_votes = 1;  // pool votes the winning type needs
  bool exclude_verbatim_query = true;
  bool memoize = true;  // cache pool predictions by document text within a batch

  void validate() const;
  Json to_json() const;
  static VotePolicy from_json(const Json& j);
};

struct Reassignment {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string surface;
  std::string old_type;
  std::string new_type;
  std::map<std::string, int> tally;   // includes the self vote when enabled
  std::vector<std::uint32_t> doc_ids;  // pool docs with a matching span
};

struct CalibrationTrace {
  std::string sentence_id;
  std::vector<Reassignment> reassignments;
};

// A retrieved pool document and the base model's spans on it.
struct Neighbor {
  std::uint32_t doc_id = 0;
  std::vector<EntitySpan> spans;
};

bool surface_matches(std::string_view query, std::string_view pool, SurfaceMatch match);

// Re-types spans by strict plurality over matching neighbor spans. Boundaries
// never change; ties keep the current type. When `labels` is given, neighbor
// types outside it raise ConfigError.
std::vector<EntitySpan> vote_types(std::span<const EntitySpan> predicted,
                                   std::span<const Neighbor> neighbors,
                                   const VotePolicy& policy,
                                   const LabelSet* labels = nullptr,
                                   CalibrationTrace* trace = nullptr);

struct Calibrated {
  std::vector<EntitySpan> base;   // the model's own prediction
  std::vector<EntitySpan> spans;  // after voting
  std::vector<std::string> tags;  // spans re-encoded in the model's scheme
  CalibrationTrace trace;
};

Calibrated calibrate(const CrfModel& model, const Index& index, const Sentence& sentence,
                     const VotePolicy& policy);
// Same, sharing a pool tagger (and its cache) across calls.
Calibrated calibrate(const PoolTagger& pool, const Sentence& sentence,
                     const VotePolicy& policy);
// Voting step only, from an existing prediction and retrieval result.
Calibrated calibrate(const PoolTagger& pool, const Sentence& sentence,
                     std::vector<EntitySpan> base, const RetrievalResult& retrieval,
                     const VotePolicy& policy);

struct BatchCalibration {
  std::vector<Calibrated> items;                           // input order
  std::vector<std::pair<std::size_t, std::string>> errors;  // sentence index, message
  std::size_t spans = 0;
  std::size_t reassigned = 0;
  std::map<std::pair<std::string, std::string>, std::size_t> matrix;  // old -> new

  double reassigned_fraction() const {
    return spans == 0 ? 0.0 : static_cast<double>(reassigned) / spans;
  }
  Json stats_json() const;
};

BatchCalibration calibrate_batch(const CrfModel& model, const Index& index,
                                 std::span<const Sentence> sentences,
                                 const VotePolicy& policy);

// One JSON object per reassignment.
Json to_json(const Reassignment& r, const std::string& sentence_id);

}  // namespace corrner
