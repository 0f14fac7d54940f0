#include "shapedist/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>

#include "shapedist/error.hpp"

namespace shapedist::kernels {

int default_threads() {
  static const int cached = [] {
    if (const char* env = std::getenv("SHAPEDIST_THREADS")) {
      const long v = std::strtol(env, nullptr, 10);
      if (v >= 1) return static_cast<int>(std::min(v, 1024L));
    }
    return omp_get_max_threads();
  }();
  return cached;
}

int resolve_threads(int requested) {
  return requested > 0 ? requested : default_threads();
}

Matrix at_b_scaled_serial(const Matrix& a, const Matrix& b, double scale) {
  if (a.rows() != b.rows()) throw DataError("at_b: row count mismatch");
  const std::size_t m = a.rows(), na = a.cols(), nb = b.cols();
  Matrix out(na, nb);
  for (std::size_t i = 0; i < na; ++i) {
    double* orow = out.row(i);
    for (std::size_t k = 0; k < m; ++k) {
      const double aki = a(k, i);
      const double* brow = b.row(k);
      for (std::size_t j = 0; j < nb; ++j) orow[j] += aki * brow[j];
    }
    for (std::size_t j = 0; j < nb; ++j) orow[j] *= scale;
  }
  return out;
}

Matrix at_b_scaled(const Matrix& a, const Matrix& b, double scale, int threads) {
  if (a.rows() != b.rows()) throw DataError("at_b: row count mismatch");
  const std::int64_t m = static_cast<std::int64_t>(a.rows());
  const std::int64_t na = static_cast<std::int64_t>(a.cols());
  const std::int64_t nb = static_cast<std::int64_t>(b.cols());
  Matrix out(na, nb);
  const int nthreads = resolve_threads(threads);
#pragma omp parallel for num_threads(nthreads) schedule(static) if (m * na * nb > 16384)
  for (std::int64_t i = 0; i < na; ++i) {
    double* orow = out.row(static_cast<std::size_t>(i));
    for (std::int64_t k = 0; k < m; ++k) {
      const double aki = a(static_cast<std::size_t>(k), static_cast<std::size_t>(i));
      const double* brow = b.row(static_cast<std::size_t>(k));
      for (std::int64_t j = 0; j < nb; ++j) orow[j] += aki * brow[j];
    }
    for (std::int64_t j = 0; j < nb; ++j) orow[j] *= scale;
  }
  return out;
}

Matrix matmul_serial(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DataError("matmul: inner dimension mismatch");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  Matrix out(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    double* orow = out.row(i);
    const double* arow = a.row(i);
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = arow[p];
      const double* brow = b.row(p);
      for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  }
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b, int threads) {
  if (a.cols() != b.rows()) throw DataError("matmul: inner dimension mismatch");
  const std::int64_t m = static_cast<std::int64_t>(a.rows());
  const std::int64_t k = static_cast<std::int64_t>(a.cols());
  const std::int64_t n = static_cast<std::int64_t>(b.cols());
  Matrix out(static_cast<std::size_t>(m), static_cast<std::size_t>(n));
  const int nthreads = resolve_threads(threads);
#pragma omp parallel for num_threads(nthreads) schedule(static) if (m * k * n > 16384)
  for (std::int64_t i = 0; i < m; ++i) {
    double* orow = out.row(static_cast<std::size_t>(i));
    const double* arow = a.row(static_cast<std::size_t>(i));
    for (std::int64_t p = 0; p < k; ++p) {
      const double aip = arow[p];
      const double* brow = b.row(static_cast<std::size_t>(p));
      for (std::int64_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  }
  return out;
}

Matrix row_gram_serial(const Matrix& x) {
  const std::size_t m = x.rows(), n = x.cols();
  Matrix out(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    const double* ri = x.row(i);
    for (std::size_t j = i; j < m; ++j) {
      const double* rj = x.row(j);
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += ri[k] * rj[k];
      out(i, j) = s;
      out(j, i) = s;
    }
  }
  return out;
}

Matrix row_gram(const Matrix& x, int threads) {
  const std::int64_t m = static_cast<std::int64_t>(x.rows());
  const std::int64_t n = static_cast<std::int64_t>(x.cols());
  Matrix out(static_cast<std::size_t>(m), static_cast<std::size_t>(m));
  const int nthreads = resolve_threads(threads);
#pragma omp parallel for num_threads(nthreads) schedule(dynamic, 8) if (m * m * n > 16384)
  for (std::int64_t i = 0; i < m; ++i) {
    const double* ri = x.row(static_cast<std::size_t>(i));
    for (std::int64_t j = i; j < m; ++j) {
      const double* rj = x.row(static_cast<std::size_t>(j));
      double s = 0.0;
      for (std::int64_t k = 0; k < n; ++k) s += ri[k] * rj[k];
      out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = s;
      out(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) = s;
    }
  }
  return out;
}

void parallel_for(std::int64_t n, int threads, const std::function<void(std::int64_t)>& fn) {
  const int nthreads = resolve_threads(threads);
  std::exception_ptr first_error = nullptr;
  std::int64_t first_error_index = -1;
  std::mutex error_mutex;
#pragma omp parallel for num_threads(nthreads) schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      fn(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (first_error == nullptr || i < first_error_index) {
        first_error = std::current_exception();
        first_error_index = i;
      }
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace shapedist::kernels
