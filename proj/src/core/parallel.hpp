#pragma once

#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace aknn {

inline unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

// Runs fn(worker, begin, end) over contiguous chunks of [0, count).
// Chunk boundaries depend only on (count, workers). The first exception
// thrown by any worker is rethrown on the calling thread.
template <typename Fn>
void parallel_chunks(uint64_t count, unsigned workers, Fn&& fn) {
  workers = resolve_workers(workers);
  if (count == 0) return;
  if (workers > count) workers = static_cast<unsigned>(count);
  if (workers <= 1) {
    fn(0u, uint64_t{0}, count);
    return;
  }

  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr first_error;
  std::mutex error_mutex;

  const uint64_t base = count / workers;
  const uint64_t extra = count % workers;
  uint64_t begin = 0;
  for (unsigned w = 0; w < workers; ++w) {
    const uint64_t end = begin + base + (w < extra ? 1 : 0);
    pool.emplace_back([&, w, begin, end] {
      try {
        fn(w, begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
    begin = end;
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace aknn
