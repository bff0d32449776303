#include "nsdf/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace nsdf {

namespace {
std::atomic<int> g_max_threads{0};  // 0 = unset, use hardware concurrency
}

int max_threads() {
  int n = g_max_threads.load();
  if (n > 0) return n;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void set_max_threads(int n) { g_max_threads.store(std::max(0, n)); }

void parallel_for_chunks(Index n, const std::function<void(Index, Index)>& fn) {
  if (n <= 0) return;
  const int workers = std::min<Index>(max_threads(), n);
  if (workers <= 1) {
    fn(0, n);
    return;
  }
  const Index chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const Index begin = Index(w) * chunk;
    const Index end = std::min(begin + chunk, n);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

void parallel_for(Index n, const std::function<void(Index)>& fn) {
  parallel_for_chunks(n, [&fn](Index begin, Index end) {
    for (Index i = begin; i < end; ++i) fn(i);
  });
}

}  // namespace nsdf
