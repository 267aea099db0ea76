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
#include <stdexcept>
#include <string>

namespace corrner {

// Broad failure classes; the CLI maps each onto an exit code.
enum class ErrorKind {
  kUsage,     // bad arguments or configuration
  kData,      // malformed input files or inconsistent data
  kInternal,  // numerical failure or broken invariant
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorKind::kUsage, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what)
      : Error(ErrorKind::kData, what) {}
};

// Tag sequence that does not decode under the strict scheme rules.
class MalformedTagsError : public DataError {
 public:
  MalformedTagsError(std::size_t position, const std::string& what);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class InvalidSpansError : public DataError {
 public:
  using DataError::DataError;
};

// CoNLL / pool text parse failure; line is 1-based.
class ParseError : public DataError {
 public:
  ParseError(const std::string& path, std::size_t line,
             const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class IndexLoadError : public DataError {
 public:
  using DataError::DataError;
};

class VersionMismatchError : public DataError {
 public:
  using DataError::DataError;
};

// Gold/pred sentence lists of different length; index is the first
// sentence with no counterpart.
class LengthMismatchError : public DataError {
 public:
  LengthMismatchError(std::size_t sentence_index, const std::string& what);
  std::size_t sentence_index() const { return sentence_index_; }

 private:
  std::size_t sentence_index_;
};

class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& what)
      : Error(ErrorKind::kInternal, what) {}
};

}  // namespace corrner
