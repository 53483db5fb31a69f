// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace maplace {

/// Worker count: explicit request, else MA_PLACEMENT_THREADS, else hardware concurrency.
inline unsigned worker_count(unsigned requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("MA_PLACEMENT_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return unsigned(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Map-reduce over [0, count). The range is cut into contiguous chunks by
/// index, each chunk is folded by `map_range(begin, end)`, and the chunk
/// results are combined left to right. With an associative `reduce` the
/// answer does not depend on the worker count.
template <typename T, typename MapRange, typename Reduce>
T parallel_map_reduce(std::size_t count, T identity, MapRange map_range, Reduce reduce, unsigned threads = 0) {
  const std::size_t workers = std::min<std::size_t>(worker_count(threads), std::max<std::size_t>(count, 1));
  if (workers <= 1) return count == 0 ? identity : reduce(identity, map_range(std::size_t(0), count));

  std::vector<T> partial(workers, identity);
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = count * w / workers;
    const std::size_t end = count * (w + 1) / workers;
    pool.emplace_back([&, w, begin, end] {
      try {
        if (begin < end) partial[w] = map_range(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  T acc = identity;
  for (auto& p : partial) acc = reduce(acc, p);
  return acc;
}

}  // namespace maplace
