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

#include "corrner/parallel.hpp"

namespace corrner {

namespace {
std::atomic<std::size_t> g_thread_limit{0};
}  // namespace

std::size_t thread_limit() {
  const std::size_t limit = g_thread_limit.load();
  if (limit > 0) return limit;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void set_thread_limit(std::size_t threads) { g_thread_limit = threads; }

}  // namespace corrner
