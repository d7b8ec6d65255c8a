#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace zest {

inline int default_worker_count() {
  if (const char* env = std::getenv("ZEST_WORKERS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(i) for i in [0, n). Work items are claimed atomically; callers must
// write results into index-addressed slots so the outcome is independent of
// scheduling. The first exception wins and is rethrown on the calling thread.
inline void parallel_for(std::int64_t n, int workers,
                         const std::function<void(std::int64_t)>& fn) {
  if (workers <= 0) workers = default_worker_count();
  if (workers == 1 || n <= 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      std::int64_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  int spawn = static_cast<int>(std::min<std::int64_t>(workers, n));
  pool.reserve(spawn);
  for (int w = 0; w < spawn; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace zest
