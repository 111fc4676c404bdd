#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace sparsewalk {

/// Number of workers to use when the config asks for 0 (all cores).
inline int resolve_threads(int requested) {
  if (requested > 0) {
    return requested;
  }
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

/// Calls fn(i) for i in [0, n) on up to `threads` workers, each owning a contiguous chunk.
/// The first exception (lowest chunk) is rethrown after all workers join.
template <class F>
void parallel_for(int n, int threads, F&& fn) {
  threads = std::clamp(threads, 1, std::max(1, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> workers;
  workers.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    const int begin = static_cast<int>(static_cast<long>(n) * w / threads);
    const int end = static_cast<int>(static_cast<long>(n) * (w + 1) / threads);
    workers.emplace_back([&, w, begin, end] {
      try {
        for (int i = begin; i < end; ++i) {
          fn(i);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : workers) {
    t.join();
  }
  for (auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
}

}  // namespace sparsewalk
