#ifndef POSECAL_SRC_PARALLEL_H_
#define POSECAL_SRC_PARALLEL_H_

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace posecal::internal {

inline int resolve_threads(int requested, int jobs) {
  int t = requested;
  if (t <= 0) t = static_cast<int>(std::thread::hardware_concurrency());
  return std::clamp(t, 1, std::max(jobs, 1));
}

// Runs fn(i) for i in [0, jobs) on `threads` workers. Callers write results
// into slots indexed by i, so the schedule never affects the output.
template <typename Fn>
void parallel_for(int jobs, int threads, Fn&& fn) {
  if (threads <= 1) {
    for (int i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      for (int i = next++; i < jobs; i = next++) fn(i);
    });
  }
}

}  // namespace posecal::internal

#endif  // POSECAL_SRC_PARALLEL_H_
