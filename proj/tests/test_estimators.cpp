#include <cmath>

#include "doctest.h"
#include "shapedist/error.hpp"
#include "shapedist/estimators.hpp"
#include "shapedist/kernels.hpp"
#include "shapedist/linalg.hpp"
#include "test_oracles.hpp"

using namespace shapedist;

namespace {

ResponseMatrix rotate_rows(const ResponseMatrix& x, const Matrix& q) {
  // y_m = Q x_m for every row: Y = X Q^T.
  return make_response(kernels::matmul(x.data, q.transposed()));
}

CovarianceSet hand_example() {
  CovarianceSet cov;
  cov.sigma_ii = Matrix::identity(2);
  cov.sigma_jj = Matrix::identity(2);
  cov.sigma_ij = Matrix::from_rows({{0.5, 0.0}, {0.0, 0.0}});
  return cov;
}

}  // namespace

TEST_CASE("plugin squared Procrustes") {
  Rng rng(1);
  const ResponseMatrix x = make_response(oracles::random_matrix(40, 6, rng));

  // Self distance is zero.
  const auto self = plugin_squared_procrustes(covariances_from_responses(x, x));
  CHECK(std::fabs(self.value) < 1e-8);

  // Rotation of the rows leaves the distance at zero.
  const Matrix q = linalg::random_orthogonal(6, rng);
  const auto rotated =
      plugin_squared_procrustes(covariances_from_responses(x, rotate_rows(x, q)));
  CHECK(std::fabs(rotated.value) < 1e-8);

  // Hand-built covariance example: 2 + 2 - 2*0.5 = 3.
  const auto hand = plugin_squared_procrustes(hand_example());
  CHECK(hand.value == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("plugin cosine similarity") {
  Rng rng(2);
  const ResponseMatrix x = make_response(oracles::random_matrix(30, 5, rng));
  const auto self = plugin_cosine_similarity(covariances_from_responses(x, x));
  CHECK(self.value == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(*self.value_clipped <= 1.0);

  CovarianceSet zero = hand_example();
  zero.sigma_ij = Matrix(2, 2, 0.0);
  CHECK(plugin_cosine_similarity(zero).value == 0.0);

  CHECK(plugin_cosine_similarity(hand_example()).value ==
        doctest::Approx(0.25).epsilon(1e-12));

  CovarianceSet degenerate = hand_example();
  degenerate.sigma_ii = Matrix(2, 2, 0.0);
  CHECK_THROWS_AS(plugin_cosine_similarity(degenerate), DataError);
}

TEST_CASE("rotation invariance and symmetry of the plug-in estimates") {
  Rng rng(3);
  for (int rep = 0; rep < 3; ++rep) {
    const ResponseMatrix x = make_response(oracles::random_matrix(25, 4, rng));
    const ResponseMatrix y = make_response(oracles::random_matrix(25, 4, rng));
    const Matrix q = linalg::random_orthogonal(4, rng);
    const ResponseMatrix yq = rotate_rows(y, q);

    const double d1 = plugin_squared_procrustes(covariances_from_responses(x, y)).value;
    const double d2 = plugin_squared_procrustes(covariances_from_responses(x, yq)).value;
    CHECK(d1 == doctest::Approx(d2).epsilon(1e-8));

    const double c1 = plugin_cosine_similarity(covariances_from_responses(x, y)).value;
    const double c2 = plugin_cosine_similarity(covariances_from_responses(x, yq)).value;
    CHECK(c1 == doctest::Approx(c2).epsilon(1e-8));

    // Swapping the pair changes nothing.
    const double ds = plugin_squared_procrustes(covariances_from_responses(y, x)).value;
    const double cs = plugin_cosine_similarity(covariances_from_responses(y, x)).value;
    CHECK(d1 == doctest::Approx(ds).epsilon(1e-8));
    CHECK(c1 == doctest::Approx(cs).epsilon(1e-8));
  }
}

TEST_CASE("metric triangle inequality on seeded triples") {
  Rng rng(4);
  for (int rep = 0; rep < 10; ++rep) {
    const ResponseMatrix a = make_response(oracles::random_matrix(20, 4, rng));
    const ResponseMatrix b = make_response(oracles::random_matrix(20, 4, rng));
    const ResponseMatrix c = make_response(oracles::random_matrix(20, 4, rng));
    auto dist = [](const ResponseMatrix& u, const ResponseMatrix& v) {
      return std::sqrt(std::max(
          0.0, plugin_squared_procrustes(covariances_from_responses(u, v)).value));
    };
    CHECK(dist(a, b) <= dist(a, c) + dist(c, b) + 1e-8);
  }
}

TEST_CASE("covariance-form equals the alignment form with the optimal rotation") {
  Rng rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t m = 15 + rng.below(20), n = 3 + rng.below(5);
    const ResponseMatrix x = make_response(oracles::random_matrix(m, n, rng));
    const ResponseMatrix y = make_response(oracles::random_matrix(m, n, rng));
    const CovarianceSet cov = covariances_from_responses(x, y);
    const double covariance_form = plugin_squared_procrustes(cov).value;

    // Optimal Q maximizes Tr[Q' Y'X]; from the SVD of S_ij = U S V', Q = V U'.
    const auto svd = linalg::svd(cov.sigma_ij);
    const Matrix q = kernels::matmul(svd.right_vectors, svd.left_vectors.transposed());
    const Matrix yq = kernels::matmul(y.data, q);
    double frob = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double d = x.data(i, j) - yq(i, j);
        frob += d * d;
      }
    CHECK(std::fabs(covariance_form - frob / double(m)) < 1e-8);
  }
}

TEST_CASE("plug-in similarity is biased upward at zero true similarity") {
  Rng rng(6);
  const int trials = 200;
  std::vector<double> vals(trials);
  for (int t = 0; t < trials; ++t) {
    const ResponseMatrix x = make_response(oracles::random_matrix(40, 20, rng));
    const ResponseMatrix y = make_response(oracles::random_matrix(40, 20, rng));
    vals[std::size_t(t)] = plugin_cosine_similarity(covariances_from_responses(x, y)).value;
  }
  double mean = 0.0;
  for (double v : vals) mean += v;
  mean /= trials;
  double var = 0.0;
  for (double v : vals) var += (v - mean) * (v - mean);
  const double se = std::sqrt(var / (trials - 1)) / std::sqrt(double(trials));
  CHECK(mean > 5.0 * se);
}

TEST_CASE("covariance set validation") {
  CovarianceSet good = hand_example();
  CHECK_NOTHROW(validate_covariance_set(good));

  CovarianceSet asym = hand_example();
  asym.sigma_ii(0, 1) = 0.5;  // ii no longer symmetric
  CHECK_THROWS_AS(validate_covariance_set(asym), DataError);

  CovarianceSet indef = hand_example();
  indef.sigma_ii(0, 0) = -1.0;
  CHECK_THROWS_AS(validate_covariance_set(indef, true), DataError);
  indef.sigma_ii(0, 0) = -1e-12;  // split-trial style: allowed without PSD
  CHECK_NOTHROW(validate_covariance_set(indef, false));
}
