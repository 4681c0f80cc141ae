#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace pcf {

/// Runs fn(0..count-1) on up to n_workers threads. Tasks must be independent;
/// results should go to preallocated per-index slots so the outcome does not
/// depend on scheduling. The first exception thrown by a task is rethrown
/// after all workers join.
inline void parallel_for(int count, int n_workers, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  n_workers = std::max(1, std::min(n_workers, count));
  if (n_workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> has_error{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!has_error.exchange(true)) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(static_cast<size_t>(n_workers));
  for (int t = 0; t < n_workers; ++t) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();
  if (has_error) std::rethrow_exception(error);
}

}  // namespace pcf
