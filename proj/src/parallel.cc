// Copyright 2026 The StealthPath Authors
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

#include "stealthpath/parallel.h"

#include <atomic>
#include <cstdlib>
#include <string>

namespace stealthpath {
namespace {

std::atomic<int> g_thread_override{0};

}  // namespace

int default_thread_count() {
  if (const int forced = g_thread_override.load(); forced > 0) return forced;
  if (const char* env = std::getenv("STEALTHPATH_THREADS")) {
    try {
      const int value = std::stoi(env);
      if (value > 0) return value;
    } catch (...) {
      // fall through to hardware default
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void set_thread_count(int threads) {
  g_thread_override.store(threads > 0 ? threads : 0);
}

}  // namespace stealthpath
