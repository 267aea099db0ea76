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

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "corrner/config.hpp"
#include "corrner/corpus.hpp"

namespace corrner {

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Zero denominators give 0 rather than being skipped.
Prf prf_from_counts(std::size_t correct, std::size_t pred, std::size_t gold);

struct TypeCounts {
  std::size_t gold = 0;
  std::size_t pred = 0;
  std::size_t correct = 0;
  Prf prf;
};

struct EvalReport {
  std::map<std::string, TypeCounts> per_type;  // gold or predicted types
  TypeCounts total;                            // micro counts and scores
  Prf macro;                                   // mean over gold types only
  Json metadata = Json::object();

  const Prf& micro() const { return total.prf; }
};

// Entity-level exact match: identical (start, end, type). Sentence lists are
// aligned by position.
EvalReport entity_prf(std::span<const std::vector<EntitySpan>> gold,
                      std::span<const std::vector<EntitySpan>> pred);

Json to_json(const EvalReport& report);

}  // namespace corrner
