#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "shapedist/estimators.hpp"
#include "shapedist/matrix.hpp"
#include "shapedist/response.hpp"

namespace shapedist {

// Stimulus-level inner products; every eigenmoment is a product of entries of
// these two M x M matrices, so nothing larger than M x M is ever formed.
struct GramPair {
  Matrix gx;  // gx(a,b) = <x_a, x_b>
  Matrix gy;  // gy(a,b) = <y_a, y_b>
  std::size_t units_x = 0;
  std::size_t units_y = 0;

  std::size_t n_stimuli() const { return gx.rows(); }
};

GramPair gram_pair(const ResponseMatrix& x, const ResponseMatrix& y, int threads = 0);

// exact: average over every ordered tuple of 2p distinct stimulus indices;
// feasible only for small M, kept as the test oracle. monte_carlo: average
// over n_tuples uniformly sampled distinct tuples; the production path.
struct MomentStrategy {
  enum class Kind { exact, monte_carlo };
  Kind kind = Kind::monte_carlo;
  std::int64_t n_tuples = 10000;
  std::uint64_t seed = 0;

  static MomentStrategy exact() { return {Kind::exact, 0, 0}; }
  static MomentStrategy monte_carlo(std::int64_t n_tuples, std::uint64_t seed) {
    return {Kind::monte_carlo, n_tuples, seed};
  }
};

// Unbiased estimate of W_p = Tr[(S_ij S_ij^T)^p]: the average over ordered
// 2p-tuples (a_1,b_1,...,a_p,b_p) of distinct indices of
//   prod_s gy(a_s,b_s) * gx(b_s, a_{s+1 mod p}).
// Requires M >= 2p. When the Monte-Carlo budget covers the full tuple count,
// the exact enumeration runs instead.
double eigenmoment(int p, const GramPair& g, const MomentStrategy& strategy,
                   int threads = 0);

// W_0..W_P with W_0 = N (deterministic) and values stored in scaled units
// W_p / kappa^p so the polynomial domain is [0, 1].
struct EigenmomentVector {
  std::vector<double> values;
  int order = 0;
  double rescale = 1.0;  // kappa
  bool scaled = false;
};

EigenmomentVector estimate_eigenmoments(const GramPair& g, int order, double kappa,
                                        std::int64_t tuple_budget, std::uint64_t seed,
                                        int threads = 0);

// Covariance of the scaled moment vector, row/column 0 fixed to zero.
struct MomentCovariance {
  Matrix a;  // (P+1) x (P+1), symmetric PSD
  std::size_t n_boot = 0;
  bool scaled = true;
};

// Empirical covariance of moment-vector draws (each of length P+1); used by
// the bootstrap below and by the simulation harness with fresh-data draws.
MomentCovariance moment_covariance_of(const std::vector<std::vector<double>>& draws);

// Resamples stimuli with replacement n_boot times and returns the empirical
// covariance of the scaled moment estimates across replicates. Tuples whose
// positions map to the same original stimulus are redrawn, preserving the
// distinct-index requirement under resampling.
MomentCovariance bootstrap_moment_covariance(const ResponseMatrix& x,
                                             const ResponseMatrix& y, int order,
                                             double kappa, std::size_t n_boot,
                                             std::uint64_t seed,
                                             std::int64_t tuple_budget = 10000,
                                             int threads = 0);

// kappa = margin * s_1(S_ij)^2, an upper-bound estimate for the largest
// eigenvalue of S_ij S_ij^T. Falls back to margin * Tr[S_ii]Tr[S_jj] / (Ni*Nj)
// when S_ij is identically zero.
double rescale_factor(const CovarianceSet& cov, double margin = 1.5);

// Polynomial coefficients selected by the bias-variance program, with the
// worst-case scaled approximation error u (verified on a finer grid) and the
// variance term gamma' A gamma.
struct CoefficientSolution {
  std::vector<double> gamma;  // gamma_0..gamma_P
  double u = 0.0;
  double variance = 0.0;
  std::optional<double> bias_cap;
  int grid_size = 0;
};

// sqrt(kappa) * sum_p gamma_p * (W_p / kappa^p): the nuclear-norm estimate.
// The moment vector must be scaled with the same kappa used when selecting
// the coefficients; an unscaled vector is a contract violation.
double moment_nuclear_norm(const EigenmomentVector& moments,
                           const CoefficientSolution& coeffs);

EstimateReport moment_cosine_similarity(double norm_estimate, double denom);

// [estimate - h, estimate + h] with h = (z*(alpha) sqrt(gamma'A gamma) + N u)
// * sqrt(kappa); the whole interval is divided by denom when supplied.
std::pair<double, double> confidence_interval(double estimate,
                                              const CoefficientSolution& coeffs,
                                              std::size_t dims, double kappa,
                                              double alpha,
                                              std::optional<double> denom = {});

}  // namespace shapedist
