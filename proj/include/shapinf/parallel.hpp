#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace shapinf {

/// Environment variable consulted for the default worker count.
inline constexpr const char* kWorkersEnvVar = "SHAPINF_WORKERS";

/// Worker count from SHAPINF_WORKERS, falling back to hardware concurrency.
inline unsigned default_workers() {
  if (const char* env = std::getenv(kWorkersEnvVar)) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Half-open index range handed to a chunk task.
struct ChunkRange {
  std::size_t chunk;
  std::size_t begin;
  std::size_t end;
};

/// Splits [0, items) into fixed-size chunks and runs `task(ChunkRange)` for
/// each, on up to `workers` threads. Chunk boundaries depend only on `items`
/// and `chunk_size`, so per-chunk results reduced in chunk order are identical
/// for every worker count.
template <class Task>
void for_each_chunk(std::size_t items, std::size_t chunk_size, unsigned workers, Task&& task) {
  if (items == 0) return;
  chunk_size = std::max<std::size_t>(chunk_size, 1);
  const std::size_t chunks = (items + chunk_size - 1) / chunk_size;
  auto run_chunk = [&](std::size_t c) {
    const std::size_t b = c * chunk_size;
    task(ChunkRange{c, b, std::min(items, b + chunk_size)});
  };
  const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), chunks));
  if (threads == 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t c = next.fetch_add(1, std::memory_order_relaxed);
        if (c >= chunks) return;
        try {
          run_chunk(c);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next.store(chunks, std::memory_order_relaxed);
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

inline std::size_t chunk_count(std::size_t items, std::size_t chunk_size) {
  return chunk_size == 0 ? 0 : (items + chunk_size - 1) / chunk_size;
}

}  // namespace shapinf
