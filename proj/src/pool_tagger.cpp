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

#include "corrner/pool_tagger.hpp"

namespace corrner {

PoolTagger::PoolTagger(const CrfModel& model, const Index& index, bool memoize)
    : model_(model), index_(index), memoize_(memoize) {}

std::shared_ptr<const std::vector<EntitySpan>> PoolTagger::spans(
    std::uint32_t doc_id) const {
  const std::string& text = index_.doc_text(doc_id);
  if (memoize_) {
    std::lock_guard lock(mu_);
    auto it = cache_.find(text);
    if (it != cache_.end()) return it->second;
  }
  Sentence s{std::to_string(doc_id), tokenize_chars(text)};
  auto result = std::make_shared<const std::vector<EntitySpan>>(
      s.tokens.empty() ? std::vector<EntitySpan>{} : tag_one(model_, s).spans);
  std::lock_guard lock(mu_);
  ++tagged_;
  if (memoize_) cache_.emplace(text, result);
  return result;
}

std::size_t PoolTagger::tagged_count() const {
  std::lock_guard lock(mu_);
  return tagged_;
}

}  // namespace corrner
