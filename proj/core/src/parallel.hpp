#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace lodpg::detail {

/// Runs fn(i) for i in [begin, end) on up to `threads` workers with a static
/// round-robin split. The first exception thrown by any worker is rethrown.
template <class Fn>
void parallel_for(int begin, int end, int threads, Fn&& fn) {
  const int n = end - begin;
  if (n <= 0) return;
  threads = std::clamp(threads, 1, n);
  if (threads == 1) {
    for (int i = begin; i < end; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (int i = begin + t; i < end; i += threads) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace lodpg::detail
