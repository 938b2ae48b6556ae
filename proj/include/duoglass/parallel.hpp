#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

#include "duoglass/text.hpp"

namespace duoglass {

// Worker count used by the simulator. DUOGLASS_THREADS caps the hardware
// default; invalid or missing values fall back to the hardware default.
inline std::size_t worker_count() {
  unsigned hw = std::thread::hardware_concurrency();
  std::size_t n = hw > 0 ? hw : 1;
  if (const char* env = std::getenv("DUOGLASS_THREADS")) {
    long long requested = 0;
    if (text::parse_int(env, requested) && requested >= 1) {
      n = std::min<std::size_t>(n, static_cast<std::size_t>(requested));
    }
  }
  return n;
}

// Runs fn(begin, end) over a partition of [0, n) on up to worker_count()
// threads. Callers must write results into disjoint, preallocated slots;
// under that discipline the output is identical for any worker count.
inline void parallel_for(std::size_t n,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  std::size_t workers = std::min(worker_count(), n);
  if (workers <= 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t begin = w * chunk;
    std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace duoglass
