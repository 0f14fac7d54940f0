#pragma once

#include "shapedist/matrix.hpp"

namespace shapedist {

// M x N response block: rows are stimuli/conditions, columns are units.
// The library never centers silently; callers opt in via center_columns.
struct ResponseMatrix {
  Matrix data;
  bool centered = false;

  std::size_t n_stimuli() const { return data.rows(); }
  std::size_t n_units() const { return data.cols(); }
};

// Validates shape (M >= 1, N >= 1) and finiteness.
ResponseMatrix make_response(Matrix data, bool centered = false);

// Optional boundedness validation: every row must satisfy ||row||_2 <= b*sqrt(N).
void validate_row_bound(const ResponseMatrix& x, double b);

// Subtracts the column means. Requires M >= 2.
ResponseMatrix center_columns(const ResponseMatrix& x);

// (1/M) sum_m x_m y_m^T, an N_x x N_y matrix.
Matrix empirical_cross_covariance(const ResponseMatrix& x, const ResponseMatrix& y,
                                  int threads = 0);

// (1/M) sum_m x_m x_m^T; symmetric PSD by construction.
Matrix empirical_covariance(const ResponseMatrix& x, int threads = 0);

// Split-trial estimator (1/M) sum_m x_m x'_m^T from two replicates of the same
// stimuli. Unbiased for the signal covariance as-is (not symmetrized); pass
// symmetrize=true for (R + R^T)/2 when downstream code wants symmetry. The
// trace is unaffected either way.
Matrix split_trial_covariance(const ResponseMatrix& x, const ResponseMatrix& x_rep,
                              bool symmetrize = false, int threads = 0);

}  // namespace shapedist
