#pragma once

// Index-ordered data-parallel map. Worker count from KLAB_WORKERS, else
// hardware concurrency; results never depend on it.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace klab {

inline unsigned worker_count() {
  if (const char* env = std::getenv("KLAB_WORKERS")) {
    try {
      long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(std::min(v, 256L));
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

template <class R, class F>
std::vector<R> parallel_map(size_t count, const F& fn) {
  std::vector<R> out(count);
  const unsigned workers = static_cast<unsigned>(std::min<size_t>(worker_count(), std::max<size_t>(count, 1)));
  if (workers <= 1) {
    for (size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (size_t i = next++; i < count; i = next++) {
        try {
          out[i] = fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace klab
