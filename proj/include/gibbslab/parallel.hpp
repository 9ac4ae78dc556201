#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace gibbslab {

// Global worker count used by the chain and grid loops. 1 = sequential.
int thread_count();
void set_thread_count(int n);

// Runs fn(begin, end) over [0, n) split into contiguous chunks, one per
// worker. Chunk boundaries depend only on n and the worker count, and
// callers reduce per-chunk results in chunk order, so results match the
// sequential order for any thread count.
template <typename Fn>
void parallel_chunks(std::size_t n, Fn&& fn) {
  const int workers = thread_count();
  if (workers <= 1 || n < 2) {
    fn(std::size_t{0}, n, 0);
    return;
  }
  const std::size_t w = static_cast<std::size_t>(workers);
  const std::size_t chunk = (n + w - 1) / w;
  std::vector<std::thread> pool;
  for (std::size_t k = 0; k * chunk < n; ++k) {
    const std::size_t b = k * chunk;
    const std::size_t e = std::min(n, b + chunk);
    pool.emplace_back([=, &fn] { fn(b, e, static_cast<int>(k)); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace gibbslab
