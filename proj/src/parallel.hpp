#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace jive::detail {

/// Runs body(i) for i in [0, count) on up to `threads` workers. Each index is
/// processed exactly once; the exception from the lowest failing index is
/// rethrown after all workers finish.
template <class Body>
void parallel_for(std::int64_t count, unsigned threads, Body&& body) {
  if (count <= 0) return;
  const auto workers =
      static_cast<unsigned>(std::clamp<std::int64_t>(static_cast<std::int64_t>(threads), 1, count));
  if (workers == 1) {
    for (std::int64_t i = 0; i < count; ++i) body(i);
    return;
  }

  std::atomic<std::int64_t> next{0};
  std::mutex error_mutex;
  std::int64_t error_index = count;
  std::exception_ptr error;

  auto work = [&] {
    for (;;) {
      const std::int64_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };

  {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace jive::detail
