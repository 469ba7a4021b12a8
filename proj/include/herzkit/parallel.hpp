// Deterministic fan-out for independent seeded restarts.
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace herzkit {

/// Worker count: HERZKIT_THREADS if set and positive, otherwise the
/// hardware concurrency (at least one).
inline int default_thread_budget() {
  if (const char* env = std::getenv("HERZKIT_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Evaluates fn(0..count-1) on up to `threads` workers. Results land at
/// their own index, so the output never depends on scheduling.
template <typename Fn>
auto parallel_map(int count, int threads, Fn&& fn)
    -> std::vector<decltype(fn(0))> {
  using Result = decltype(fn(0));
  std::vector<Result> out(static_cast<std::size_t>(std::max(count, 0)));
  if (count <= 0) return out;
  const int workers = std::clamp(threads <= 0 ? default_thread_budget() : threads,
                                 1, count);
  if (workers == 1) {
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = fn(i);
    return out;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          out[static_cast<std::size_t>(i)] = fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace herzkit
