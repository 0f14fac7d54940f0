#include "shapedist/response.hpp"

#include <cmath>
#include <string>

#include "shapedist/error.hpp"
#include "shapedist/kernels.hpp"

namespace shapedist {

ResponseMatrix make_response(Matrix data, bool centered) {
  if (data.rows() < 1 || data.cols() < 1)
    throw DataError("response matrix must have at least one row and one column");
  require_finite(data, "response matrix");
  return ResponseMatrix{std::move(data), centered};
}

void validate_row_bound(const ResponseMatrix& x, double b) {
  if (!(b > 0.0)) throw DataError("row bound must be positive");
  const double limit = b * std::sqrt(static_cast<double>(x.n_units()));
  for (std::size_t i = 0; i < x.n_stimuli(); ++i) {
    double s = 0.0;
    const double* row = x.data.row(i);
    for (std::size_t j = 0; j < x.n_units(); ++j) s += row[j] * row[j];
    if (std::sqrt(s) > limit * (1.0 + 1e-12))
      throw DataError("row " + std::to_string(i + 1) + " violates the norm bound B*sqrt(N)");
  }
}

ResponseMatrix center_columns(const ResponseMatrix& x) {
  const std::size_t m = x.n_stimuli(), n = x.n_units();
  if (m < 2) throw DataError("center_columns: need at least 2 rows");
  std::vector<double> mean(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = x.data.row(i);
    for (std::size_t j = 0; j < n; ++j) mean[j] += row[j];
  }
  for (std::size_t j = 0; j < n; ++j) mean[j] /= static_cast<double>(m);
  Matrix out = x.data;
  for (std::size_t i = 0; i < m; ++i) {
    double* row = out.row(i);
    for (std::size_t j = 0; j < n; ++j) row[j] -= mean[j];
  }
  return ResponseMatrix{std::move(out), true};
}

Matrix empirical_cross_covariance(const ResponseMatrix& x, const ResponseMatrix& y,
                                  int threads) {
  if (x.n_stimuli() != y.n_stimuli())
    throw DataError("cross covariance: stimulus counts differ");
  const double scale = 1.0 / static_cast<double>(x.n_stimuli());
  return kernels::at_b_scaled(x.data, y.data, scale, threads);
}

Matrix empirical_covariance(const ResponseMatrix& x, int threads) {
  return empirical_cross_covariance(x, x, threads);
}

Matrix split_trial_covariance(const ResponseMatrix& x, const ResponseMatrix& x_rep,
                              bool symmetrize, int threads) {
  if (x.n_stimuli() != x_rep.n_stimuli() || x.n_units() != x_rep.n_units())
    throw DataError("split-trial covariance: replicate shape differs");
  Matrix r = empirical_cross_covariance(x, x_rep, threads);
  if (symmetrize) {
    Matrix rt = r.transposed();
    r += rt;
    r *= 0.5;
  }
  return r;
}

}  // namespace shapedist
