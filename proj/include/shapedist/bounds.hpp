#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace shapedist::bounds {

struct BoundParams {
  double b = 1.0;       // response bound B
  std::size_t n = 1;    // dimension
  std::size_t m = 1;    // sample count
  double delta = 0.05;  // failure probability
};

// B sqrt(N/M) sqrt(2 log(2/delta)): trace estimation error, high probability.
double lemma1_bound(const BoundParams& p);

// 2 B^2 N^2 log(2N) / (3M) + 2 B^2 N^2 sqrt(log(2N)) / sqrt(M): expected
// nuclear-norm estimation error.
double lemma2_bound(double b, std::size_t n, std::size_t m);

// High-probability bound on |rho^2_hat - rho^2| / N.
double theorem1_bound(const BoundParams& p);

// (16 B^2 / 3 pi) sqrt(N/M): the asymptotic worst-case plug-in error
// |rho^2_hat - rho^2| / N on the decorrelated construction.
double plugin_error_lower_bound(const BoundParams& p);

// (8 / 3 pi) n^{3/2} m^{-1/2}: asymptotic nuclear norm of the empirical
// cross-covariance of two independent unit-variance populations.
double ginibre_nuclear_asymptote(std::size_t n, std::size_t m);

// sqrt(4 sigma^2 - s^2) / (pi sigma^2) on (0, 2 sigma), else 0.
double quarter_circle_density(double s, double sigma);

struct LowerBoundRow {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t trials = 0;
  double mean_nuclear = 0.0;
  double sd_nuclear = 0.0;
  double asymptote = 0.0;
};

// For each m: sample `trials` independent pairs (standard Gaussian entries by
// default, Rademacher +-1 otherwise), record the mean plug-in nuclear norm of
// the empirical cross-covariance next to the asymptote. trials = 0 gives an
// empty table.
std::vector<LowerBoundRow> verify_lower_bound_experiment(
    std::size_t n, std::span<const std::size_t> m_grid, std::size_t trials,
    std::uint64_t seed, bool rademacher = false, int threads = 0);

}  // namespace shapedist::bounds
