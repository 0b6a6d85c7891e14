#pragma once
#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ponderolens {

/// Global worker count for parallel maps. Results never depend on it:
/// every index writes its own slot and reductions run in index order.
inline std::atomic<int>& thread_count() {
  static std::atomic<int> n{1};
  return n;
}

inline bool& in_parallel_region() {
  thread_local bool inside = false;
  return inside;
}

/// Calls fn(i, worker) for i in [0, n). Work is handed out dynamically.
/// Nested calls run serially on the calling worker.
template <class F>
void parallel_for(std::size_t n, F&& fn) {
  const int nt = in_parallel_region()
                     ? 1
                     : std::max(1, std::min<int>(thread_count().load(), int(n)));
  if (nt <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i, 0);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto body = [&](int w) {
    in_parallel_region() = true;
    try {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i, w);
    } catch (...) {
      std::lock_guard<std::mutex> lk(err_mu);
      if (!err) err = std::current_exception();
    }
    in_parallel_region() = false;
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < nt; ++w) pool.emplace_back(body, w);
  body(0);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace ponderolens
