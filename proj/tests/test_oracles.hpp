#pragma once

// Test-only oracles, independent of the library's linear-algebra backend.

#include <algorithm>
#include <cmath>
#include <vector>

#include "shapedist/matrix.hpp"
#include "shapedist/rng.hpp"

namespace oracles {

// Cyclic Jacobi eigenvalue iteration for symmetric matrices. Returns the
// eigenvalues sorted descending.
inline std::vector<double> jacobi_eigenvalues(const shapedist::Matrix& input) {
  const std::size_t n = input.rows();
  std::vector<std::vector<double>> a(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i][j] = input(i, j);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
    if (off < 1e-26) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::fabs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a[i][i];
  std::sort(eig.begin(), eig.end(), std::greater<double>());
  return eig;
}

// m^T m as a plain loop, for eigenvalue-based singular value oracles.
inline shapedist::Matrix mt_m(const shapedist::Matrix& m) {
  shapedist::Matrix out(m.cols(), m.cols(), 0.0);
  for (std::size_t i = 0; i < m.cols(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < m.rows(); ++k) s += m(k, i) * m(k, j);
      out(i, j) = s;
    }
  return out;
}

inline shapedist::Matrix m_mt(const shapedist::Matrix& m) {
  shapedist::Matrix out(m.rows(), m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.rows(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < m.cols(); ++k) s += m(i, k) * m(j, k);
      out(i, j) = s;
    }
  return out;
}

inline shapedist::Matrix random_matrix(std::size_t rows, std::size_t cols,
                                       shapedist::Rng& rng) {
  shapedist::Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

}  // namespace oracles
