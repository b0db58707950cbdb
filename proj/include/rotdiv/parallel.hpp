#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rotdiv {

/// Number of workers to use when the caller passes 0.
inline unsigned default_workers() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1U : n;
}

/// Runs fn(task) for task in [0, n_tasks) on up to `workers` threads. Tasks
/// are claimed dynamically; callers must write results into per-task slots
/// so the outcome does not depend on scheduling. The first exception thrown
/// by any task is rethrown after all threads join.
template <class Fn>
void parallel_for(std::size_t n_tasks, unsigned workers, Fn&& fn) {
  if (workers == 0) workers = default_workers();
  const std::size_t n_threads = std::min<std::size_t>(workers, n_tasks);
  if (n_threads <= 1) {
    for (std::size_t t = 0; t < n_tasks; ++t) fn(t);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= n_tasks) return;
      try {
        fn(t);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n_tasks);
        return;
      }
    }
  };

  std::vector<std::jthread> pool;
  pool.reserve(n_threads - 1);
  for (std::size_t i = 1; i < n_threads; ++i) pool.emplace_back(body);
  body();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace rotdiv
