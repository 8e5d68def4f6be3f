#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace tbench {

/// Runs fn(i) for i in [0, n) on up to `parallelism` worker threads.
/// Tasks must be independent (each owns its derived rng stream). If any
/// task throws, the exception from the lowest index is rethrown after all
/// workers finish, so failures are scheduling-independent too.
void parallel_for_index(std::size_t n, int parallelism,
                        const std::function<void(std::size_t)>& fn);

/// parallel_for_index collecting results by index.
template <typename R>
std::vector<R> parallel_map(std::size_t n, int parallelism,
                            const std::function<R(std::size_t)>& fn) {
  std::vector<R> results(n);
  parallel_for_index(n, parallelism,
                     [&](std::size_t i) { results[i] = fn(i); });
  return results;
}

}  // namespace tbench
