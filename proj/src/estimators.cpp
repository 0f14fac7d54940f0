#include "shapedist/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "shapedist/error.hpp"
#include "shapedist/linalg.hpp"

namespace shapedist {

CovarianceSet covariances_from_responses(const ResponseMatrix& x, const ResponseMatrix& y,
                                         int threads) {
  if (x.n_stimuli() != y.n_stimuli())
    throw DataError("covariances: stimulus counts differ");
  CovarianceSet cov;
  cov.sigma_ii = empirical_covariance(x, threads);
  cov.sigma_jj = empirical_covariance(y, threads);
  cov.sigma_ij = empirical_cross_covariance(x, y, threads);
  return cov;
}

namespace {

void check_symmetric_psd(const Matrix& s, const char* label, bool require_psd) {
  if (s.rows() != s.cols()) throw DataError(std::string(label) + ": not square");
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t j = i + 1; j < s.cols(); ++j)
      if (std::fabs(s(i, j) - s(j, i)) > 1e-10)
        throw DataError(std::string(label) + ": not symmetric within 1e-10");
  if (require_psd) {
    const auto eig = linalg::sym_eig(s);
    if (!eig.eigenvalues.empty() && eig.eigenvalues.front() < -1e-10)
      throw DataError(std::string(label) + ": negative eigenvalue beyond tolerance");
  }
}

}  // namespace

void validate_covariance_set(const CovarianceSet& cov, bool require_psd) {
  check_symmetric_psd(cov.sigma_ii, "sigma_ii", require_psd);
  check_symmetric_psd(cov.sigma_jj, "sigma_jj", require_psd);
  if (cov.sigma_ij.rows() != cov.sigma_ii.rows() ||
      cov.sigma_ij.cols() != cov.sigma_jj.rows())
    throw DataError("sigma_ij: dimensions inconsistent with the diagonal blocks");
}

const char* to_string(EstimateKind kind) {
  switch (kind) {
    case EstimateKind::plugin_sq_procrustes: return "plugin_sq_procrustes";
    case EstimateKind::plugin_cos_similarity: return "plugin_cos_similarity";
    case EstimateKind::moment_cos_similarity: return "moment_cos_similarity";
    case EstimateKind::moment_nuclear_norm: return "moment_nuclear_norm";
  }
  return "unknown";
}

EstimateReport plugin_squared_procrustes(const CovarianceSet& cov) {
  if (cov.sigma_ij.rows() != cov.sigma_ii.rows() ||
      cov.sigma_ij.cols() != cov.sigma_jj.rows())
    throw DataError("plugin estimator: covariance dimensions inconsistent");
  EstimateReport r;
  r.kind = EstimateKind::plugin_sq_procrustes;
  r.value = cov.sigma_ii.trace() + cov.sigma_jj.trace() -
            2.0 * linalg::nuclear_norm(cov.sigma_ij);
  return r;
}

EstimateReport plugin_cosine_similarity(const CovarianceSet& cov) {
  if (cov.sigma_ij.rows() != cov.sigma_ii.rows() ||
      cov.sigma_ij.cols() != cov.sigma_jj.rows())
    throw DataError("plugin estimator: covariance dimensions inconsistent");
  const double tii = cov.sigma_ii.trace();
  const double tjj = cov.sigma_jj.trace();
  if (!(tii > 0.0) || !(tjj > 0.0))
    throw DataError("plugin cosine similarity: non-positive trace");
  EstimateReport r;
  r.kind = EstimateKind::plugin_cos_similarity;
  r.value = linalg::nuclear_norm(cov.sigma_ij) / std::sqrt(tii * tjj);
  r.value_clipped = std::clamp(r.value, 0.0, 1.0);
  return r;
}

}  // namespace shapedist
