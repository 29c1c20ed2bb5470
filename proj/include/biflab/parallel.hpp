#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace biflab {

/// Process-wide worker cap (0 = hardware concurrency). Set once from the
/// CLI before launching work.
inline std::atomic<int>& thread_cap() {
  static std::atomic<int> cap{0};
  return cap;
}

inline int effective_threads(std::size_t n_items) {
  int hw = int(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  const int cap = thread_cap().load(std::memory_order_relaxed);
  if (cap > 0) hw = std::min(hw, cap);
  return int(std::min<std::size_t>(std::size_t(hw),
                                   std::max<std::size_t>(n_items, 1)));
}

/// Chunked parallel loop over [0, n). Workers claim disjoint index ranges,
/// so results written by index are deterministic regardless of scheduling.
/// The callback must not throw.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const int nt = effective_threads(n);
  if (nt <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t chunk =
      std::max<std::size_t>(1, n / (std::size_t(nt) * 16));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(std::size_t(nt));
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([&next, chunk, n, &fn] {
      for (;;) {
        const std::size_t begin = next.fetch_add(chunk);
        if (begin >= n) return;
        const std::size_t end = std::min(n, begin + chunk);
        for (std::size_t i = begin; i < end; ++i) fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace biflab
