#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace cumdamage {

/// Number of worker threads to use for a request of `workers` (0 = all cores).
inline std::size_t resolve_workers(std::size_t workers) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  return workers;
}

/// Calls `body(begin, end)` on contiguous chunks of [0, n) from up to
/// `workers` threads. Chunks are processed independently; if several throw,
/// the exception of the lowest chunk is rethrown, so the reported failure is
/// the same as in a sequential run.
template <class Body>
void parallel_chunks(std::size_t n, std::size_t workers, Body&& body) {
  workers = std::min(resolve_workers(workers), std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    body(std::size_t{0}, n);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(n, w * chunk);
      const std::size_t end = std::min(n, begin + chunk);
      threads.emplace_back([&, w, begin, end] {
        try {
          body(begin, end);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace cumdamage
