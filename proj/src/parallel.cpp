#include "jcindex/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace jcindex {
namespace {
std::atomic<unsigned> g_workers{0};
// Nested calls from inside a worker run serially instead of spawning more threads.
thread_local bool t_inside_worker = false;
}

void set_worker_count(unsigned workers) { g_workers.store(workers); }

unsigned worker_count() {
  const unsigned w = g_workers.load();
  if (w > 0) return w;
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_chunks(std::size_t n, std::size_t chunk_size,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
  const std::size_t chunks = chunk_count(n, chunk_size);
  if (chunks == 0) return;
  const auto workers = static_cast<std::size_t>(std::min<std::size_t>(worker_count(), chunks));
  auto run = [&](std::size_t c) { body(c, c * chunk_size, std::min(n, (c + 1) * chunk_size)); };
  if (workers <= 1 || t_inside_worker) {
    for (std::size_t c = 0; c < chunks; ++c) run(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::size_t failed_chunk = chunks;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      t_inside_worker = true;
      for (;;) {
        const std::size_t c = next.fetch_add(1);
        if (c >= chunks) return;
        try {
          run(c);
        } catch (...) {
          // Report the lowest failing chunk so errors do not depend on scheduling.
          std::lock_guard lock(failure_mutex);
          if (c < failed_chunk) {
            failed_chunk = c;
            failure = std::current_exception();
          }
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace jcindex
