#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace lab {

/// Runs fn(i) for i in [0, n). With threads <= 1 the loop is sequential.
/// Work is sharded by index so results written to per-index slots land in
/// a fixed order regardless of scheduling.
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int nworkers = std::min(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(nworkers);
  for (int w = 0; w < nworkers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += nworkers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

/// Thread count resolution: explicit argument wins, then LAB_THREADS, then 1.
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("LAB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

}  // namespace lab
