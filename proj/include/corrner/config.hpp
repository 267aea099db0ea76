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

#include <initializer_list>
#include <string>
#include <string_view>

#include "json.hpp"

namespace corrner {

using Json = nlohmann::json;

inline constexpr std::string_view kToolVersion = "corrner 0.3.0";

// SHA-256 (hex) of the canonical dump: keys sorted, no whitespace.
std::string config_hash(const Json& config);
std::string sha256_hex(std::string_view bytes);

// Rejects keys outside `allowed`; `where` names the section in the error.
void check_keys(const Json& object, std::initializer_list<std::string_view> allowed,
                std::string_view where);

[[noreturn]] void throw_config_type_error(std::string_view key,
                                          std::string_view detail);

// Typed lookup with a default; wrong types raise ConfigError.
template <typename T>
T get_or(const Json& object, const char* key, T fallback) {
  if (!object.contains(key)) return fallback;
  try {
    return object.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw_config_type_error(key, e.what());
  }
}

Json read_json(const std::string& path);
// Pretty-printed, trailing newline.
void write_json(const Json& value, const std::string& path);

// Adds tool_version and config_hash fields.
void stamp(Json& artifact, const std::string& hash);

// Sidecar metadata for artifacts whose format has no room for it.
void write_sidecar(const std::string& artifact_path, const std::string& hash,
                   const Json& extra = Json::object());
// True when `path` exists and its recorded config hash equals `hash`.
bool artifact_current(const std::string& path, const std::string& hash);

}  // namespace corrner
