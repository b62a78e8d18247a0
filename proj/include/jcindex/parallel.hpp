#pragma once

#include <cstddef>
#include <functional>

namespace jcindex {

// Worker count used by the library; 0 means hardware concurrency.
void set_worker_count(unsigned workers);
unsigned worker_count();

// Runs body(begin, end) over contiguous chunks of [0, n). Chunk boundaries
// depend only on n and chunk_size, never on the worker count, so callers that
// reduce per-chunk results in chunk order get identical output at any
// parallelism. Calls made from inside a worker run serially.
void parallel_chunks(std::size_t n, std::size_t chunk_size,
                     const std::function<void(std::size_t chunk, std::size_t begin, std::size_t end)>& body);

inline std::size_t chunk_count(std::size_t n, std::size_t chunk_size) {
  return chunk_size == 0 ? 0 : (n + chunk_size - 1) / chunk_size;
}

}  // namespace jcindex
