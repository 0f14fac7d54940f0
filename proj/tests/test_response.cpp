#include <cmath>

#include "doctest.h"
#include "shapedist/error.hpp"
#include "shapedist/response.hpp"
#include "test_oracles.hpp"

using namespace shapedist;

TEST_CASE("center_columns") {
  // Exactly-centered input is returned unchanged.
  const ResponseMatrix centered =
      make_response(Matrix::from_rows({{-1.0, -1.0}, {1.0, 1.0}}));
  const ResponseMatrix again = center_columns(centered);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(again.data(i, j) == centered.data(i, j));
  CHECK(again.centered);

  // Constant column becomes zero.
  const ResponseMatrix constant =
      center_columns(make_response(Matrix::from_rows({{5.0}, {5.0}, {5.0}})));
  for (std::size_t i = 0; i < 3; ++i) CHECK(constant.data(i, 0) == 0.0);

  const ResponseMatrix basic =
      center_columns(make_response(Matrix::from_rows({{1.0, 2.0}, {3.0, 4.0}})));
  CHECK(basic.data(0, 0) == -1.0);
  CHECK(basic.data(0, 1) == -1.0);
  CHECK(basic.data(1, 0) == 1.0);
  CHECK(basic.data(1, 1) == 1.0);

  // Column means vanish after centering.
  Rng rng(10);
  const ResponseMatrix r = center_columns(make_response(oracles::random_matrix(50, 7, rng)));
  for (std::size_t j = 0; j < 7; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < 50; ++i) mean += r.data(i, j);
    CHECK(std::fabs(mean / 50.0) < 1e-12);
  }

  CHECK_THROWS_AS(center_columns(make_response(Matrix::from_rows({{1.0, 2.0}}))),
                  DataError);
}

TEST_CASE("empirical cross covariance") {
  // Single stimulus: the outer product.
  const ResponseMatrix x1 = make_response(Matrix::from_rows({{2.0, 3.0}}));
  const ResponseMatrix y1 = make_response(Matrix::from_rows({{5.0, -1.0, 4.0}}));
  const Matrix outer = empirical_cross_covariance(x1, y1);
  CHECK(outer.rows() == 2);
  CHECK(outer.cols() == 3);
  CHECK(outer(1, 2) == 12.0);

  // Rows of the identity: (1/N) I.
  const ResponseMatrix id = make_response(Matrix::identity(4));
  const Matrix c = empirical_cross_covariance(id, id);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      CHECK(c(i, j) == (i == j ? 0.25 : 0.0));

  // Exact match against the outer-product loop oracle.
  Rng rng(17);
  const ResponseMatrix x = make_response(oracles::random_matrix(10, 3, rng));
  const ResponseMatrix y = make_response(oracles::random_matrix(10, 3, rng));
  Matrix expect(3, 3, 0.0);
  for (std::size_t k = 0; k < 10; ++k)
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) expect(i, j) += x.data(k, i) * y.data(k, j);
  expect *= 0.1;
  const Matrix got = empirical_cross_covariance(x, y);
  for (std::size_t i = 0; i < expect.size(); ++i)
    CHECK(got.data()[i] == expect.data()[i]);

  CHECK_THROWS_AS(empirical_cross_covariance(
                      x, make_response(oracles::random_matrix(9, 3, rng))),
                  DataError);
}

TEST_CASE("empirical covariance") {
  const ResponseMatrix a = make_response(Matrix::from_rows({{1.0, -2.0}}));
  const Matrix c1 = empirical_covariance(a);
  CHECK(c1(0, 0) == 1.0);
  CHECK(c1(0, 1) == -2.0);
  CHECK(c1(1, 1) == 4.0);

  Rng rng(23);
  const ResponseMatrix x = make_response(oracles::random_matrix(50, 4, rng));
  Matrix expect(4, 4, 0.0);
  for (std::size_t k = 0; k < 50; ++k)
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) expect(i, j) += x.data(k, i) * x.data(k, j);
  expect *= 1.0 / 50.0;
  const Matrix got = empirical_covariance(x);
  for (std::size_t i = 0; i < expect.size(); ++i)
    CHECK(got.data()[i] == expect.data()[i]);
}

TEST_CASE("split-trial covariance") {
  Rng rng(31);
  const ResponseMatrix x = make_response(oracles::random_matrix(12, 5, rng));
  // Zero noise: replicate equals the original, estimator equals the plain one.
  const Matrix split = split_trial_covariance(x, x);
  const Matrix plain = empirical_covariance(x);
  for (std::size_t i = 0; i < split.size(); ++i)
    CHECK(split.data()[i] == plain.data()[i]);

  // Hand-built M=2 case against the loop oracle.
  const ResponseMatrix a = make_response(Matrix::from_rows({{1.0, 0.0}, {0.0, 2.0}}));
  const ResponseMatrix b = make_response(Matrix::from_rows({{3.0, 1.0}, {-1.0, 4.0}}));
  const Matrix s2 = split_trial_covariance(a, b);
  CHECK(s2(0, 0) == doctest::Approx(0.5 * (1.0 * 3.0 + 0.0)));
  CHECK(s2(0, 1) == doctest::Approx(0.5 * (1.0 * 1.0 + 0.0)));
  CHECK(s2(1, 0) == doctest::Approx(0.5 * (0.0 + 2.0 * -1.0)));
  CHECK(s2(1, 1) == doctest::Approx(0.5 * (0.0 + 2.0 * 4.0)));

  // Symmetrized option keeps the trace.
  const Matrix sym = split_trial_covariance(a, b, true);
  CHECK(sym(0, 1) == sym(1, 0));
  CHECK(sym.trace() == doctest::Approx(s2.trace()));

  // Independent pure-noise replicates: entries shrink toward zero at the
  // O(M^{-1/2}) rate (3 standard errors, unit noise variance).
  const std::size_t m = 20000, n = 2;
  Rng noise_rng(77);
  const ResponseMatrix n1 = make_response(oracles::random_matrix(m, n, noise_rng));
  const ResponseMatrix n2 = make_response(oracles::random_matrix(m, n, noise_rng));
  const Matrix sn = split_trial_covariance(n1, n2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      CHECK(std::fabs(sn(i, j)) < 3.0 / std::sqrt(double(m)));

  CHECK_THROWS_AS(split_trial_covariance(a, make_response(Matrix(3, 2, 1.0))), DataError);
}

TEST_CASE("row bound validation") {
  // Rademacher-style rows saturate the bound exactly.
  const ResponseMatrix r =
      make_response(Matrix::from_rows({{1.0, -1.0, 1.0}, {-1.0, -1.0, -1.0}}));
  CHECK_NOTHROW(validate_row_bound(r, 1.0));
  CHECK_THROWS_AS(validate_row_bound(r, 0.9), DataError);
  CHECK_THROWS_AS(validate_row_bound(r, 0.0), DataError);
}

TEST_CASE("response validation") {
  CHECK_THROWS_AS(make_response(Matrix(0, 3)), DataError);
  Matrix bad(2, 2, 0.0);
  bad(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(make_response(std::move(bad)), DataError);
}
