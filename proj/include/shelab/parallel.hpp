#pragma once

#include <algorithm>
#include <exception>
#include <optional>
#include <vector>

namespace shelab {

/// Chunk size of the ordered reduction. Fixed so that the floating-point
/// merge tree never depends on the worker count.
inline constexpr int kReduceChunk = 8;

/// Items [0, n) are split into fixed chunks; each chunk is folded in index
/// order into a fresh accumulator, then chunks are merged in order. Acc must
/// provide merge(const Acc&).
template <class Acc, class Make, class Body>
Acc ordered_reduce_serial(int n, Make make, Body body) {
  Acc total = make();
  for (int c0 = 0; c0 < n; c0 += kReduceChunk) {
    Acc part = make();
    for (int i = c0; i < std::min(n, c0 + kReduceChunk); ++i) body(part, i);
    total.merge(part);
  }
  return total;
}

template <class Acc, class Make, class Body>
Acc ordered_reduce(int n, int workers, Make make, Body body) {
  if (workers <= 1) return ordered_reduce_serial<Acc>(n, make, body);
  const int n_chunks = (n + kReduceChunk - 1) / kReduceChunk;
  std::vector<std::optional<Acc>> parts(n_chunks);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (int c = 0; c < n_chunks; ++c) {
    try {
      Acc part = make();
      const int c0 = c * kReduceChunk;
      for (int i = c0; i < std::min(n, c0 + kReduceChunk); ++i) body(part, i);
      parts[c].emplace(std::move(part));
    } catch (...) {
#pragma omp critical(shelab_reduce_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  Acc total = make();
  for (auto& p : parts) total.merge(*p);
  return total;
}

}  // namespace shelab
