#include "shapedist/linalg.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>

#include "shapedist/error.hpp"

namespace shapedist::linalg {

namespace {

using EigenRowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const EigenRowMajor> as_eigen(const Matrix& m) {
  return {m.data(), static_cast<Eigen::Index>(m.rows()),
          static_cast<Eigen::Index>(m.cols())};
}

Matrix from_eigen(const Eigen::MatrixXd& e) {
  Matrix m(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
  for (Eigen::Index i = 0; i < e.rows(); ++i)
    for (Eigen::Index j = 0; j < e.cols(); ++j)
      m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = e(i, j);
  return m;
}

void clamp_small(std::vector<double>& s) {
  if (s.empty()) return;
  const double floor = 1e-12 * s.front();
  for (double& v : s)
    if (v < floor) v = 0.0;
}

}  // namespace

SvdResult svd(const Matrix& m) {
  require_finite(m, "svd input");
  Eigen::JacobiSVD<Eigen::MatrixXd> solver(as_eigen(m),
                                           Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (solver.info() != Eigen::Success)
    throw NumericalError("svd: iteration did not converge");
  SvdResult r;
  const auto& sv = solver.singularValues();
  r.singular_values.assign(sv.data(), sv.data() + sv.size());
  clamp_small(r.singular_values);
  r.left_vectors = from_eigen(solver.matrixU());
  r.right_vectors = from_eigen(solver.matrixV());
  return r;
}

std::vector<double> singular_values(const Matrix& m) {
  require_finite(m, "svd input");
  Eigen::JacobiSVD<Eigen::MatrixXd> solver(as_eigen(m));
  if (solver.info() != Eigen::Success)
    throw NumericalError("svd: iteration did not converge");
  const auto& sv = solver.singularValues();
  std::vector<double> s(sv.data(), sv.data() + sv.size());
  clamp_small(s);
  return s;
}

double nuclear_norm(const Matrix& m) {
  double sum = 0.0;
  for (double v : singular_values(m)) sum += v;
  return sum;
}

SymEigResult sym_eig(const Matrix& s) {
  if (s.rows() != s.cols()) throw DataError("sym_eig: matrix not square");
  require_finite(s, "sym_eig input");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(as_eigen(s));
  if (solver.info() != Eigen::Success)
    throw NumericalError("sym_eig: iteration did not converge");
  SymEigResult r;
  const auto& ev = solver.eigenvalues();
  r.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  r.eigenvectors = from_eigen(solver.eigenvectors());
  return r;
}

Matrix cholesky_lower(const Matrix& s) {
  if (s.rows() != s.cols()) throw DataError("cholesky: matrix not square");
  require_finite(s, "cholesky input");
  Eigen::MatrixXd a = as_eigen(s);
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    // Boundary-PSD inputs (e.g. saturated cross-covariance): tiny ridge retry.
    const double ridge = 1e-12 * std::max(1.0, a.diagonal().cwiseAbs().maxCoeff());
    a.diagonal().array() += ridge;
    llt.compute(a);
    if (llt.info() != Eigen::Success)
      throw NumericalError("cholesky: matrix is not positive semidefinite");
  }
  return from_eigen(llt.matrixL());
}

Matrix random_orthogonal(std::size_t n, Rng& rng) {
  if (n < 1) throw DataError("random_orthogonal: n must be >= 1");
  Eigen::MatrixXd g(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (std::size_t j = 0; j < n; ++j)
    if (r(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) < 0.0)
      q.col(static_cast<Eigen::Index>(j)) *= -1.0;
  return from_eigen(q);
}

}  // namespace shapedist::linalg
