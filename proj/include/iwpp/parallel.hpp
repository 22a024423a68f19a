#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace iwpp {

/// Runs body(first, last) over [0, count) split into contiguous chunks, one thread per chunk.
template <typename Body>
void parallel_chunks(int count, std::size_t n_workers, Body&& body) {
  if (count <= 0) return;
  const auto n = std::max<std::size_t>(1, std::min<std::size_t>(n_workers, static_cast<std::size_t>(count)));
  if (n == 1) {
    body(0, count);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(n);
  for (std::size_t w = 0; w < n; ++w) {
    const int first = static_cast<int>(static_cast<std::size_t>(count) * w / n);
    const int last = static_cast<int>(static_cast<std::size_t>(count) * (w + 1) / n);
    pool.emplace_back([&body, first, last] { body(first, last); });
  }
}

}  // namespace iwpp
