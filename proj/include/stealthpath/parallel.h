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

#ifndef STEALTHPATH_PARALLEL_H_
#define STEALTHPATH_PARALLEL_H_

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace stealthpath {

// Worker count: STEALTHPATH_THREADS if set and positive, otherwise the
// hardware concurrency.
int default_thread_count();

// Overrides the worker count for the calling process (0 restores default).
void set_thread_count(int threads);

// Splits [0, count) into contiguous chunks and runs body(begin, end) on each
// chunk, one chunk per worker. Callers write into index-addressed slots and
// reduce afterwards in index order, so results do not depend on the worker
// count. The first exception thrown by any chunk (lowest chunk index) is
// rethrown on the calling thread.
template <typename Body>
void parallel_chunks(std::size_t count, Body&& body) {
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(default_thread_count()),
                            count == 0 ? 1 : count);
  if (workers <= 1) {
    body(std::size_t{0}, count);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = count * w / workers;
    const std::size_t end = count * (w + 1) / workers;
    pool.emplace_back([&, w, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace stealthpath

#endif  // STEALTHPATH_PARALLEL_H_
