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

#include <span>
#include <string>
#include <string_view>

namespace corrner {

// Exit codes of the corrner binary.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitInternal = 3;

// Runs one command line (argv[0] is the program name). Diagnostics go to
// standard error.
int run_cli(int argc, const char* const* argv);

// Closest known subcommand by edit distance, or "" when nothing is close.
std::string suggest_subcommand(std::string_view typed);

}  // namespace corrner
