#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace sphqmc {

inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

// Runs fn(job) for job = 0..n_jobs-1 on up to `threads` workers.  The job
// decomposition is fixed, so any per-job outputs written to job-indexed slots
// are identical for every thread count; callers reduce over slots in job
// order to get bit-stable results.
inline void parallel_jobs(std::size_t n_jobs, unsigned threads,
                          const std::function<void(std::size_t)>& fn) {
  threads = resolve_threads(threads);
  if (threads <= 1 || n_jobs <= 1) {
    for (std::size_t j = 0; j < n_jobs; ++j) fn(j);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const std::size_t j = next.fetch_add(1);
      if (j >= n_jobs) return;
      try {
        fn(j);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned n_workers =
      static_cast<unsigned>(std::min<std::size_t>(threads, n_jobs));
  pool.reserve(n_workers);
  for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace sphqmc
