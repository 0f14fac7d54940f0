#include "shapedist/bounds.hpp"

#include <cmath>

#include "shapedist/error.hpp"
#include "shapedist/kernels.hpp"
#include "shapedist/linalg.hpp"
#include "shapedist/rng.hpp"
#include "shapedist/synthetic.hpp"

namespace shapedist::bounds {

namespace {

void check(const BoundParams& p) {
  if (!(p.b > 0.0)) throw DataError("bound params: B must be positive");
  if (p.n < 1 || p.m < 1) throw DataError("bound params: N and M must be >= 1");
  if (!(p.delta > 0.0 && p.delta < 1.0))
    throw DataError("bound params: delta must be in (0,1)");
}

}  // namespace

double lemma1_bound(const BoundParams& p) {
  check(p);
  const double n = static_cast<double>(p.n), m = static_cast<double>(p.m);
  return p.b * std::sqrt(n / m) * std::sqrt(2.0 * std::log(2.0 / p.delta));
}

double lemma2_bound(double b, std::size_t n, std::size_t m) {
  if (!(b > 0.0) || n < 1 || m < 1) throw DataError("lemma2: invalid parameters");
  const double nd = static_cast<double>(n), md = static_cast<double>(m);
  const double b2n2 = b * b * nd * nd;
  return 2.0 * b2n2 * std::log(2.0 * nd) / (3.0 * md) +
         2.0 * b2n2 * std::sqrt(std::log(2.0 * nd)) / std::sqrt(md);
}

double theorem1_bound(const BoundParams& p) {
  check(p);
  const double b = p.b, n = static_cast<double>(p.n), m = static_cast<double>(p.m);
  const double log2n = std::log(2.0 * n);
  const double tail = std::sqrt(2.0 * std::log(6.0 / p.delta));
  return 2.0 * b * b * n * log2n / (3.0 * m) +
         2.0 * b * b * n * std::sqrt(log2n) / std::sqrt(m) +
         (b * b / std::sqrt(m) + 2.0 * b / std::sqrt(n * m)) * tail;
}

double plugin_error_lower_bound(const BoundParams& p) {
  if (!(p.b > 0.0) || p.n < 1 || p.m < 1)
    throw DataError("lower bound: invalid parameters");
  const double n = static_cast<double>(p.n), m = static_cast<double>(p.m);
  return (16.0 * p.b * p.b / (3.0 * M_PI)) * std::sqrt(n / m);
}

double ginibre_nuclear_asymptote(std::size_t n, std::size_t m) {
  if (n < 1 || m < 1) throw DataError("ginibre asymptote: invalid parameters");
  const double nd = static_cast<double>(n), md = static_cast<double>(m);
  return (8.0 / (3.0 * M_PI)) * std::pow(nd, 1.5) / std::sqrt(md);
}

double quarter_circle_density(double s, double sigma) {
  if (!(sigma > 0.0)) throw DataError("quarter circle: sigma must be positive");
  if (s <= 0.0 || s >= 2.0 * sigma) return 0.0;
  return std::sqrt(4.0 * sigma * sigma - s * s) / (M_PI * sigma * sigma);
}

std::vector<LowerBoundRow> verify_lower_bound_experiment(
    std::size_t n, std::span<const std::size_t> m_grid, std::size_t trials,
    std::uint64_t seed, bool rademacher, int threads) {
  std::vector<LowerBoundRow> rows;
  if (trials == 0) return rows;
  for (std::size_t gi = 0; gi < m_grid.size(); ++gi) {
    const std::size_t m = m_grid[gi];
    const std::uint64_t grid_seed = mix_seed(seed, gi);
    std::vector<double> norms(trials, 0.0);
    kernels::parallel_for(static_cast<std::int64_t>(trials), threads, [&](std::int64_t t) {
      Rng rng(mix_seed(grid_seed, static_cast<std::uint64_t>(t)));
      auto [x, y] = rademacher ? synth::rademacher_pair(m, n, 1.0, rng)
                               : synth::gaussian_pair(m, n, rng);
      const Matrix cross =
          kernels::at_b_scaled(x.data, y.data, 1.0 / static_cast<double>(m), 1);
      norms[static_cast<std::size_t>(t)] = linalg::nuclear_norm(cross);
    });
    LowerBoundRow row;
    row.n = n;
    row.m = m;
    row.trials = trials;
    double mean = 0.0;
    for (double v : norms) mean += v;
    mean /= static_cast<double>(trials);
    double var = 0.0;
    for (double v : norms) var += (v - mean) * (v - mean);
    row.mean_nuclear = mean;
    row.sd_nuclear = trials > 1 ? std::sqrt(var / static_cast<double>(trials - 1)) : 0.0;
    row.asymptote = ginibre_nuclear_asymptote(n, m);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace shapedist::bounds
