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

#include "corrner/error.hpp"

namespace corrner {

MalformedTagsError::MalformedTagsError(std::size_t position,
                                       const std::string& what)
    : DataError("malformed tags at position " + std::to_string(position) +
                ": " + what),
      position_(position) {}

ParseError::ParseError(const std::string& path, std::size_t line,
                       const std::string& what)
    : DataError(path + ":" + std::to_string(line) + ": " + what),
      line_(line) {}

LengthMismatchError::LengthMismatchError(std::size_t sentence_index,
                                         const std::string& what)
    : DataError(what + " (sentence " + std::to_string(sentence_index) + ")"),
      sentence_index_(sentence_index) {}

}  // namespace corrner
