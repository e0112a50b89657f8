#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace sbt {

/// Worker count: SBT_THREADS if set to a positive integer, otherwise the
/// hardware concurrency.
inline int thread_count() {
  if (const char* env = std::getenv("SBT_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(i) for i in [0, n). Each index writes only its own output slot,
/// so results do not depend on the schedule. The first exception thrown
/// (lowest index) is rethrown after all workers finish.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, int threads = thread_count()) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::size_t first_index = n;
  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(err_mutex);
        if (i < first_index) {
          first_index = i;
          first_error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::jthread> pool;
  const std::size_t spawn = std::min(workers, n);
  pool.reserve(spawn);
  for (std::size_t t = 0; t < spawn; ++t) pool.emplace_back(work);
  pool.clear();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace sbt
