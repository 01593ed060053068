#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace binpick {

// Static index partition over [begin, end). Each index is processed exactly
// once; callers write results into index-addressed slots, so the outcome is
// independent of thread count and scheduling. threads = 0 picks the
// hardware count.
inline void parallel_for(int begin, int end, int threads,
                         const std::function<void(int)>& fn) {
  const int n = end - begin;
  if (n <= 0) return;
  int t = threads > 0 ? threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  if (t < 1) t = 1;
  t = std::min(t, n);
  if (t == 1) {
    for (int i = begin; i < end; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (int w = 0; w < t; ++w) {
    pool.emplace_back([=, &fn] {
      for (int i = begin + w; i < end; i += t) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace binpick
