#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <utility>
#include <vector>

namespace dbr {

/// Worker cap: DBAR_RANGE_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
int thread_cap();

/// Runs body(begin, end) over a fixed partition of [0, n). The partition depends
/// only on n and the chunk count, never on scheduling, so per-chunk results
/// combined in chunk order give identical reductions on every run.
template <class Body>
void parallel_chunks(std::size_t n, std::size_t chunks, Body&& body) {
  if (n == 0) return;
  if (chunks == 0) chunks = 1;
  if (chunks > n) chunks = n;
  auto range = [&](std::size_t c) {
    return std::pair<std::size_t, std::size_t>{n * c / chunks, n * (c + 1) / chunks};
  };
  const std::size_t workers = std::min<std::size_t>(chunks, static_cast<std::size_t>(thread_cap()));
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) {
      auto [b, e] = range(c);
      body(c, b, e);
    }
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t c = w; c < chunks; c += workers) {
        auto [b, e] = range(c);
        body(c, b, e);
      }
    });
  }
  for (auto& t : pool) t.join();
}

/// Number of chunks used for grid sweeps; fixed so results do not depend on
/// the thread cap.
inline constexpr std::size_t kSweepChunks = 64;

}  // namespace dbr
