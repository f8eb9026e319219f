#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace symkl {

inline unsigned resolve_workers(unsigned requested) {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Splits [0, count) into contiguous blocks, one per worker, and calls
/// fn(begin, end, worker) on each. The first exception thrown is rethrown.
template <class Fn>
void parallel_blocks(std::size_t count, unsigned workers, Fn&& fn) {
  const unsigned w = static_cast<unsigned>(
      std::min<std::size_t>(resolve_workers(workers), std::max<std::size_t>(count, 1)));
  if (w <= 1) {
    fn(std::size_t{0}, count, 0u);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> threads;
    threads.reserve(w);
    for (unsigned t = 0; t < w; ++t) {
      const std::size_t begin = count * t / w;
      const std::size_t end = count * (t + 1) / w;
      threads.emplace_back([&, begin, end, t] {
        try {
          fn(begin, end, t);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace symkl
