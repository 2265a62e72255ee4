#pragma once

#include <atomic>
#include <functional>
#include <future>
#include <vector>

namespace carnot {

// Process-wide worker count for scan-level parallelism. Results are always
// joined in index order, so the output is byte-identical for any setting.
int worker_count();
void set_worker_count(int n);

template <class T, class F>
std::vector<T> parallel_map(int count, F&& fn) {
  std::vector<T> out(count);
  int workers = std::min(worker_count(), count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<int> next{0};
  std::vector<std::future<void>> futures;
  futures.reserve(workers);
  for (int w = 0; w < workers; ++w)
    futures.push_back(std::async(std::launch::async, [&]() {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) out[i] = fn(i);
    }));
  for (auto& f : futures) f.get();
  return out;
}

}  // namespace carnot
