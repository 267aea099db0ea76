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

#include <string>
#include <string_view>
#include <vector>

namespace corrner::utf8 {

inline constexpr char32_t kReplacement = 0xFFFD;

// Decodes UTF-8; invalid or truncated sequences become U+FFFD.
std::u32string decode(std::string_view text);

void append(std::string& out, char32_t cp);
std::string encode(std::u32string_view cps);

// One string per code point, in order.
std::vector<std::string> split_code_points(std::string_view text);

std::size_t length(std::string_view text);

// Keeps at most max_code_points code points.
std::string truncate(std::string_view text, std::size_t max_code_points);

// Ideographs, kana and hangul: scripts written without word separators.
bool is_cjk(char32_t cp);
bool is_ascii_alnum(char32_t cp);
bool is_space(char32_t cp);

}  // namespace corrner::utf8
