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
#include <memory>
#include <mutex>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "corrner/corpus.hpp"
#include "corrner/retriever.hpp"
#include "corrner/tagger.hpp"

namespace corrner {

// Tags pool documents with a fixed model, optionally memoized by doc id.
// Safe to share across threads; results never depend on cache state.
class PoolTagger {
 public:
  PoolTagger(const CrfModel& model, const Index& index, bool memoize = true);

  // Predicted spans (with surfaces) for one pool document.
  std::shared_ptr<const std::vector<EntitySpan>> spans(std::uint32_t doc_id) const;

  const CrfModel& model() const { return model_; }
  const Index& index() const { return index_; }
  std::size_t tagged_count() const;  // decodes actually run

 private:
  const CrfModel& model_;
  const Index& index_;
  bool memoize_;
  mutable std::mutex mu_;
  // Keyed by document text (views into the index), so duplicate texts share
  // one decode.
  mutable std::unordered_map<std::string_view, std::shared_ptr<const std::vector<EntitySpan>>>
      cache_;
  mutable std::size_t tagged_ = 0;
};

}  // namespace corrner
