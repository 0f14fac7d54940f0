#pragma once

#include <cstdint>
#include <functional>

#include "shapedist/matrix.hpp"

namespace shapedist::kernels {

// Worker-pool width: SHAPEDIST_THREADS if set, else hardware parallelism.
int default_threads();
// 0 -> default_threads(), otherwise the requested count (min 1).
int resolve_threads(int requested);

// Every *_serial function is the plain-loop reference implementation; the
// OpenMP variant must produce bitwise-identical output for any thread count
// (each output element is computed by exactly one thread, in the same
// per-element summation order as the reference). tests/ assert the match and
// benchmarks/ compare the timings.

// out = scale * a^T b  for a: M x Na, b: M x Nb (shared leading dimension M).
Matrix at_b_scaled_serial(const Matrix& a, const Matrix& b, double scale);
Matrix at_b_scaled(const Matrix& a, const Matrix& b, double scale, int threads = 0);

// out = a b
Matrix matmul_serial(const Matrix& a, const Matrix& b);
Matrix matmul(const Matrix& a, const Matrix& b, int threads = 0);

// out(i,j) = <row_i, row_j>, the M x M Gram matrix of rows.
Matrix row_gram_serial(const Matrix& x);
Matrix row_gram(const Matrix& x, int threads = 0);

// Runs fn(i) for i in [0, n) on the pool. The body must only write to
// i-indexed slots; the first exception thrown (lowest i) is rethrown.
void parallel_for(std::int64_t n, int threads, const std::function<void(std::int64_t)>& fn);

}  // namespace shapedist::kernels
