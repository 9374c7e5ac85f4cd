#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace macrosync {

/// Runs fn(i) for i in [0, n) on `workers` threads (0 = hardware
/// concurrency). Items are claimed from a shared atomic counter; results must
/// be written to per-index slots by the caller, which keeps output order
/// deterministic regardless of scheduling. The first exception thrown by any
/// item is rethrown on the calling thread after all workers join.
inline void parallel_for(std::size_t n, int workers,
                         const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  unsigned int nthreads =
      workers > 0 ? static_cast<unsigned int>(workers)
                  : std::max(1u, std::thread::hardware_concurrency());
  nthreads = std::min<unsigned long>(nthreads, n);
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto work = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) break;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (unsigned int t = 0; t < nthreads; ++t) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace macrosync
