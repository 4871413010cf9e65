#pragma once

// Deterministic data-parallel reductions.
//
// Work is split into fixed-size chunks independent of the thread count. Each
// chunk is reduced serially; chunk partials are then combined in index order.
// Results are therefore bit-identical for any OMP_NUM_THREADS.

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pricing::parallel {

inline constexpr std::size_t kChunk = 4096;

inline std::size_t chunk_count(std::size_t n) { return (n + kChunk - 1) / kChunk; }

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

/// Sum of body(begin, end) over fixed chunks of [0, n).
template <class ChunkBody>
double chunked_sum(std::size_t n, ChunkBody&& body) {
  const std::size_t chunks = chunk_count(n);
  if (chunks <= 1) return n == 0 ? 0.0 : body(std::size_t{0}, n);
  std::vector<double> partial(chunks, 0.0);
  const auto nc = static_cast<long long>(chunks);
#pragma omp parallel for schedule(static)
  for (long long c = 0; c < nc; ++c) {
    const std::size_t b = static_cast<std::size_t>(c) * kChunk;
    partial[static_cast<std::size_t>(c)] = body(b, std::min(n, b + kChunk));
  }
  double s = 0.0;
  for (double v : partial) s += v;
  return s;
}

/// Vector-valued variant: body(begin, end, acc) adds into acc (length dim).
/// Returns the scalar part separately through body's return value.
template <class ChunkBody>
double chunked_sum_vec(std::size_t n, std::size_t dim, std::span<double> out, ChunkBody&& body) {
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t chunks = chunk_count(n);
  if (chunks == 0) return 0.0;
  std::vector<double> partial(chunks * (dim + 1), 0.0);
  const auto nc = static_cast<long long>(chunks);
#pragma omp parallel for schedule(static) if (chunks > 1)
  for (long long c = 0; c < nc; ++c) {
    const std::size_t ci = static_cast<std::size_t>(c);
    const std::size_t b = ci * kChunk;
    std::span<double> acc(partial.data() + ci * (dim + 1) + 1, dim);
    partial[ci * (dim + 1)] = body(b, std::min(n, b + kChunk), acc);
  }
  double s = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    s += partial[c * (dim + 1)];
    for (std::size_t j = 0; j < dim; ++j) out[j] += partial[c * (dim + 1) + 1 + j];
  }
  return s;
}

}  // namespace pricing::parallel
