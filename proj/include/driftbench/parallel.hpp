#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace driftbench {

namespace detail {
inline std::atomic<int>& max_threads_slot() {
  static std::atomic<int> n{0};  // 0 = use hardware concurrency
  return n;
}
}  // namespace detail

inline void set_max_threads(int n) { detail::max_threads_slot() = n; }

inline int max_threads() {
  int n = detail::max_threads_slot().load();
  if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
  return n > 0 ? n : 1;
}

/// Runs fn(i) for i in [0, count). Work is split into contiguous chunks, one
/// per worker; fn must only write to slots owned by index i so the result is
/// independent of the thread count.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(max_threads()), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::atomic<bool> failed{false};
  constexpr std::size_t kChunk = 16;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t begin = next.fetch_add(kChunk);
        if (begin >= count || failed.load()) break;
        const std::size_t end = std::min(begin + kChunk, count);
        for (std::size_t i = begin; i < end; ++i) {
          try {
            fn(i);
          } catch (...) {
            if (!failed.exchange(true)) first_error = std::current_exception();
            return;
          }
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace driftbench
