#pragma once

#include <atomic>
#include <mutex>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace rwlab {

// Worker count: RWLAB_WORKERS env var, else hardware concurrency.
inline unsigned default_workers() {
  if (const char* env = std::getenv("RWLAB_WORKERS")) {
    const long v = std::atol(env);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? hc : 1;
}

// Runs fn(i) for i in [0, n) on a bounded pool and returns results in index
// order. fn must be independent across indices (replicas draw from disjoint
// seed paths), which makes the merged output independent of worker count.
template <class T, class Fn>
std::vector<T> parallel_replicas(std::size_t n, Fn&& fn, unsigned workers = 0) {
  if (workers == 0) workers = default_workers();
  std::vector<T> out(n);
  if (n == 0) return out;
  if (workers <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const unsigned n_threads = static_cast<unsigned>(
      std::min<std::size_t>(workers, n));
  pool.reserve(n_threads);
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  for (unsigned t = 0; t < n_threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n || failed.load()) return;
        try {
          out[i] = fn(i);
        } catch (...) {
          {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
          }
          failed.store(true);
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace rwlab
