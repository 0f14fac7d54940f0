#pragma once

#include <optional>
#include <string>

#include "shapedist/matrix.hpp"
#include "shapedist/response.hpp"

namespace shapedist {

// Empirical covariance triple for a network pair.
struct CovarianceSet {
  Matrix sigma_ii;  // N_i x N_i
  Matrix sigma_jj;  // N_j x N_j
  Matrix sigma_ij;  // N_i x N_j
};

CovarianceSet covariances_from_responses(const ResponseMatrix& x, const ResponseMatrix& y,
                                         int threads = 0);

// Symmetry within 1e-10 and eigenvalues >= -1e-10 for the diagonal blocks.
// Split-trial covariances are allowed to fail the PSD half; pass
// require_psd=false for them.
void validate_covariance_set(const CovarianceSet& cov, bool require_psd = true);

enum class EstimateKind {
  plugin_sq_procrustes,
  plugin_cos_similarity,
  moment_cos_similarity,
  moment_nuclear_norm,
};

const char* to_string(EstimateKind kind);

struct EstimateReport {
  double value = 0.0;
  EstimateKind kind = EstimateKind::plugin_sq_procrustes;
  // Cosine-similarity estimates are reported unclipped; this carries the
  // clipped-to-[0,1] convenience value.
  std::optional<double> value_clipped;
  std::optional<double> bias_bound;
  std::optional<double> std_error;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  std::optional<double> alpha;
};

// Tr[S_ii] + Tr[S_jj] - 2 ||S_ij||_*
EstimateReport plugin_squared_procrustes(const CovarianceSet& cov);

// ||S_ij||_* / sqrt(Tr[S_ii] Tr[S_jj]); requires positive traces.
EstimateReport plugin_cosine_similarity(const CovarianceSet& cov);

}  // namespace shapedist
