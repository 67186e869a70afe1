#pragma once
/**
 * @file threads.hpp
 * @brief Minimal work-sharing helper: an index-parallel loop whose worker
 *        count is capped by the CMC1_NUM_THREADS environment variable.
 *
 * Grid evaluations are embarrassingly parallel (pure construction, no shared
 * mutable state), so a dynamic index queue over std::thread is all we need.
 * The first exception thrown by a worker is captured and rethrown on the
 * calling thread after every worker has joined.
 */

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cmc1 {

/// Worker cap: hardware concurrency, overridden by CMC1_NUM_THREADS when the
/// variable parses to a positive integer.
inline int thread_cap() {
  unsigned hw = std::thread::hardware_concurrency();
  int cap = hw == 0 ? 1 : static_cast<int>(hw);
  if (const char* env = std::getenv("CMC1_NUM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) cap = static_cast<int>(std::min(v, 256L));
  }
  return std::max(1, cap);
}

/// Run fn(i) for i in [0, n). Order of execution is unspecified; fn must be
/// safe to call concurrently for distinct indices.
template <class Fn>
inline void parallel_for(int n, Fn&& fn) {
  if (n <= 0) return;
  const int workers = std::min(thread_cap(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto body = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace cmc1
