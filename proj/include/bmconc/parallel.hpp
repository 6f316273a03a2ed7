#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace bmconc {

/// Number of workers to use when the caller passes 0.
inline unsigned default_workers() {
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1u : hc;
}

/// Splits [0, count) into `workers` contiguous chunks and runs
/// fn(chunk_index, begin, end) on each, one thread per chunk. Returns the
/// number of chunks so callers can merge per-chunk partials in chunk order.
template <class Fn>
std::size_t parallel_chunks(std::size_t count, unsigned workers, Fn&& fn) {
  if (workers == 0) workers = default_workers();
  std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(workers, count));
  if (chunks == 1) {
    fn(std::size_t{0}, std::size_t{0}, count);
    return 1;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(chunks);
  threads.reserve(chunks);
  for (std::size_t c = 0; c < chunks; ++c) {
    std::size_t begin = count * c / chunks;
    std::size_t end = count * (c + 1) / chunks;
    threads.emplace_back([&, c, begin, end] {
      try {
        fn(c, begin, end);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return chunks;
}

}  // namespace bmconc
