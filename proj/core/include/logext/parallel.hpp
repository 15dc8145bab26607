#ifndef LOGEXT_PARALLEL_HPP
#define LOGEXT_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace logext {

struct ExecutionOptions {
  // 0 means std::thread::hardware_concurrency().
  unsigned threads = 0;

  unsigned resolved_threads() const {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    return threads == 0 ? hw : threads;
  }
};

// Runs body(i) for i in [0, count). Work is handed out in chunks from an atomic
// counter, so which thread runs which index varies; callers write results to
// slot i and never depend on execution order.
template <class Body>
void parallel_for(std::size_t count, const ExecutionOptions& exec, Body&& body) {
  const std::size_t workers = std::min<std::size_t>(exec.resolved_threads(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  const std::size_t chunk = std::max<std::size_t>(1, count / (workers * 16));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    try {
      for (;;) {
        const std::size_t begin = next.fetch_add(chunk);
        if (begin >= count) break;
        const std::size_t end = std::min(count, begin + chunk);
        for (std::size_t i = begin; i < end; ++i) body(i);
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next.store(count);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace logext

#endif  // LOGEXT_PARALLEL_HPP
