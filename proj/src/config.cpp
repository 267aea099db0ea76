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

#include "corrner/config.hpp"

#include <openssl/evp.h>

#include <filesystem>
#include <fstream>

#include "corrner/error.hpp"

namespace corrner {

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1) {
    throw Error(ErrorKind::kInternal, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 15]);
  }
  return out;
}

std::string config_hash(const Json& config) { return sha256_hex(config.dump()); }

void check_keys(const Json& object,
                std::initializer_list<std::string_view> allowed,
                std::string_view where) {
  if (!object.is_object()) {
    throw ConfigError(std::string(where) + ": expected a JSON object");
  }
  for (const auto& [key, value] : object.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) {
      throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
    }
  }
}

void throw_config_type_error(std::string_view key, std::string_view detail) {
  throw ConfigError("config key '" + std::string(key) +
                    "' has the wrong type: " + std::string(detail));
}

Json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_json(const Json& value, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << value.dump(2) << '\n';
  if (!out) throw DataError("write failed: " + path);
}

void stamp(Json& artifact, const std::string& hash) {
  artifact["tool_version"] = kToolVersion;
  artifact["config_hash"] = hash;
}

void write_sidecar(const std::string& artifact_path, const std::string& hash,
                   const Json& extra) {
  Json meta = extra;
  meta["artifact"] = std::filesystem::path(artifact_path).filename().string();
  stamp(meta, hash);
  write_json(meta, artifact_path + ".meta.json");
}

bool artifact_current(const std::string& path, const std::string& hash) {
  namespace fs = std::filesystem;
  std::string meta_path = path;
  if (fs::is_directory(path)) {
    meta_path = (fs::path(path) / "meta.json").string();
  } else if (fs::path(path).extension() != ".json") {
    meta_path = path + ".meta.json";
  }
  if (!fs::exists(path) || !fs::exists(meta_path)) return false;
  try {
    const Json meta = read_json(meta_path);
    return meta.value("config_hash", std::string()) == hash;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace corrner
