#include "shapedist/pipeline.hpp"

#include <cmath>

#include "shapedist/error.hpp"
#include "shapedist/qp.hpp"
#include "shapedist/rng.hpp"

namespace shapedist {

namespace {

CovarianceSet build_covariances(const ResponseMatrix& x, const ResponseMatrix& y,
                                const std::optional<ResponseMatrix>& x_rep,
                                const std::optional<ResponseMatrix>& y_rep,
                                int threads) {
  if (x.n_stimuli() != y.n_stimuli())
    throw DataError("estimator inputs: stimulus counts differ");
  if (x_rep.has_value() != y_rep.has_value())
    throw DataError("split-trial mode needs replicates for both networks");
  CovarianceSet cov;
  if (x_rep) {
    cov.sigma_ii = split_trial_covariance(x, *x_rep, /*symmetrize=*/false, threads);
    cov.sigma_jj = split_trial_covariance(y, *y_rep, /*symmetrize=*/false, threads);
  } else {
    cov.sigma_ii = empirical_covariance(x, threads);
    cov.sigma_jj = empirical_covariance(y, threads);
  }
  cov.sigma_ij = empirical_cross_covariance(x, y, threads);
  return cov;
}

}  // namespace

MomentPipelineResult run_moment_pipeline(const ResponseMatrix& x, const ResponseMatrix& y,
                                         const std::optional<ResponseMatrix>& x_rep,
                                         const std::optional<ResponseMatrix>& y_rep,
                                         const MomentPipelineConfig& cfg) {
  const CovarianceSet cov = build_covariances(x, y, x_rep, y_rep, cfg.threads);
  const double tii = cov.sigma_ii.trace();
  const double tjj = cov.sigma_jj.trace();
  if (!(tii > 0.0) || !(tjj > 0.0))
    throw DataError("moment pipeline: non-positive trace in the denominator");
  const double denom = std::sqrt(tii * tjj);
  const double kappa = rescale_factor(cov, cfg.margin);
  const std::size_t n = x.n_units();

  const GramPair g = gram_pair(x, y, cfg.threads);
  const EigenmomentVector moments = estimate_eigenmoments(
      g, cfg.order, kappa, cfg.tuple_budget, mix_seed(cfg.seed, 1), cfg.threads);
  const MomentCovariance a =
      bootstrap_moment_covariance(x, y, cfg.order, kappa, cfg.n_boot,
                                  mix_seed(cfg.seed, 2), cfg.tuple_budget, cfg.threads);

  std::optional<double> cap_scaled;
  if (cfg.bias_cap) {
    if (*cfg.bias_cap < 0.0) throw DataError("bias cap must be non-negative");
    cap_scaled = *cfg.bias_cap * denom / std::sqrt(kappa);
  }
  const CoefficientSolution coeffs =
      qp::select_coefficients(a, n, cfg.order, cfg.grid_size, cap_scaled);

  MomentPipelineResult out;
  out.coeffs = coeffs;
  out.kappa = kappa;
  out.denom = denom;
  out.split_trial = x_rep.has_value();

  const double nuc = moment_nuclear_norm(moments, coeffs);
  const double bias_nuc = std::sqrt(kappa) * static_cast<double>(n) * coeffs.u;
  const double se_nuc = std::sqrt(kappa) * std::sqrt(std::max(0.0, coeffs.variance));

  out.nuclear.kind = EstimateKind::moment_nuclear_norm;
  out.nuclear.value = nuc;
  out.nuclear.bias_bound = bias_nuc;
  out.nuclear.std_error = se_nuc;
  out.nuclear.alpha = cfg.alpha;
  const auto [nlo, nhi] = confidence_interval(nuc, coeffs, n, kappa, cfg.alpha);
  out.nuclear.ci_low = nlo;
  out.nuclear.ci_high = nhi;

  out.cosine = moment_cosine_similarity(nuc, denom);
  out.cosine.bias_bound = bias_nuc / denom;
  out.cosine.std_error = se_nuc / denom;
  out.cosine.alpha = cfg.alpha;
  const auto [clo, chi] = confidence_interval(nuc, coeffs, n, kappa, cfg.alpha, denom);
  out.cosine.ci_low = clo;
  out.cosine.ci_high = chi;
  return out;
}

PluginResult run_plugin_estimators(const ResponseMatrix& x, const ResponseMatrix& y,
                                   const std::optional<ResponseMatrix>& x_rep,
                                   const std::optional<ResponseMatrix>& y_rep,
                                   int threads) {
  const CovarianceSet cov = build_covariances(x, y, x_rep, y_rep, threads);
  PluginResult out;
  out.sq_procrustes = plugin_squared_procrustes(cov);
  out.cosine = plugin_cosine_similarity(cov);
  out.split_trial = x_rep.has_value();
  return out;
}

}  // namespace shapedist
