#pragma once

#include <vector>

#include "shapedist/matrix.hpp"
#include "shapedist/rng.hpp"

namespace shapedist::linalg {

struct SvdResult {
  std::vector<double> singular_values;  // non-increasing, >= 0
  Matrix left_vectors;                  // rows x k, orthonormal columns
  Matrix right_vectors;                 // cols x k, orthonormal columns
};

// Thin deterministic SVD. Singular values below 1e-12 * s_1 are clamped to
// zero so nuclear norms of rank-deficient matrices are not polluted by noise.
SvdResult svd(const Matrix& m);

// Values-only fast path (same clamping).
std::vector<double> singular_values(const Matrix& m);

double nuclear_norm(const Matrix& m);

struct SymEigResult {
  std::vector<double> eigenvalues;  // ascending
  Matrix eigenvectors;              // columns
};

SymEigResult sym_eig(const Matrix& s);

// Lower Cholesky factor; throws NumericalError if the matrix is not PSD
// (a 1e-12-scaled ridge retry handles boundary cases before giving up).
Matrix cholesky_lower(const Matrix& s);

// Haar-distributed orthogonal matrix: QR of a standard Gaussian matrix with
// the sign-of-R-diagonal correction.
Matrix random_orthogonal(std::size_t n, Rng& rng);

}  // namespace shapedist::linalg
