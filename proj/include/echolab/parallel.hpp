#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace echolab {

// Runs fn(i) for i in [0, count) on up to `threads` workers. Callers write
// results into slot i, so reductions stay in index order no matter which
// worker finishes first. After a failure no new indices are started, and the
// exception of the lowest failing index is rethrown through on_error(i, ptr).
template <typename Fn, typename OnError>
void parallel_for(std::size_t count, int threads, Fn&& fn, OnError&& on_error) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (;;) {
      if (failed.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
        failed.store(true);
      }
    }
  };
  const std::size_t n_workers =
      std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(threads), count));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < count; ++i)
    if (errors[i]) on_error(i, errors[i]);
}

}  // namespace echolab
