#include "shapedist/qp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "shapedist/error.hpp"

namespace shapedist::qp {

namespace {

using Real = long double;
using Vec = std::vector<Real>;

// Row-major dense matrix of long doubles, local to the solver.
struct Mat {
  std::size_t rows = 0, cols = 0;
  Vec data;
  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0L) {}
  Real& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  Real operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

Real dot(const Vec& a, const Vec& b) {
  Real s = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Vec matvec(const Mat& m, const Vec& v) {
  Vec out(m.rows, 0.0L);
  for (std::size_t i = 0; i < m.rows; ++i) {
    Real s = 0.0L;
    for (std::size_t j = 0; j < m.cols; ++j) s += m(i, j) * v[j];
    out[i] = s;
  }
  return out;
}

Vec matvec_t(const Mat& m, const Vec& v) {
  Vec out(m.cols, 0.0L);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const Real vi = v[i];
    if (vi == 0.0L) continue;
    for (std::size_t j = 0; j < m.cols; ++j) out[j] += m(i, j) * vi;
  }
  return out;
}

Real max_abs(const Vec& v) {
  Real m = 0.0L;
  for (Real x : v) m = std::max(m, std::fabs(x));
  return m;
}

// LDL^T factorization without pivoting; adequate for the small SPD-plus-ridge
// systems this solver builds. Returns false on a vanishing pivot.
bool ldlt_solve(Mat k, Vec& rhs) {
  const std::size_t n = k.rows;
  Vec d(n, 0.0L);
  for (std::size_t j = 0; j < n; ++j) {
    Real dj = k(j, j);
    for (std::size_t p = 0; p < j; ++p) dj -= k(j, p) * k(j, p) * d[p];
    if (std::fabs(dj) < std::numeric_limits<Real>::min() * 1e4L) return false;
    d[j] = dj;
    for (std::size_t i = j + 1; i < n; ++i) {
      Real v = k(i, j);
      for (std::size_t p = 0; p < j; ++p) v -= k(i, p) * k(j, p) * d[p];
      k(i, j) = v / dj;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = 0; p < i; ++p) rhs[i] -= k(i, p) * rhs[p];
  for (std::size_t i = 0; i < n; ++i) rhs[i] /= d[i];
  for (std::size_t i = n; i-- > 0;)
    for (std::size_t p = i + 1; p < n; ++p) rhs[i] -= k(p, i) * rhs[p];
  return true;
}

// Householder QR with column pivoting of an r x c matrix (r small).
// Produces Q (r x r), R (r x c, upper trapezoidal), pivot order, and rank.
struct PivotedQr {
  Mat q;
  Mat r;
  std::vector<std::size_t> piv;
  std::size_t rank = 0;
};

PivotedQr pivoted_qr(Mat a, Real rank_tol = 1e-13L) {
  const std::size_t m = a.rows, n = a.cols;
  PivotedQr out;
  out.q = Mat(m, m);
  for (std::size_t i = 0; i < m; ++i) out.q(i, i) = 1.0L;
  out.piv.resize(n);
  for (std::size_t j = 0; j < n; ++j) out.piv[j] = j;

  Vec col_norm(n, 0.0L);
  auto norm_of = [&](std::size_t j, std::size_t from) {
    Real s = 0.0L;
    for (std::size_t i = from; i < m; ++i) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };
  const std::size_t steps = std::min(m, n);
  Real first_pivot = 0.0L;
  for (std::size_t t = 0; t < steps; ++t) {
    std::size_t best = t;
    Real best_norm = -1.0L;
    for (std::size_t j = t; j < n; ++j) {
      col_norm[j] = norm_of(j, t);
      if (col_norm[j] > best_norm) {
        best_norm = col_norm[j];
        best = j;
      }
    }
    if (t == 0) first_pivot = best_norm;
    if (best_norm <= rank_tol * std::max(1.0L, first_pivot)) break;
    if (best != t) {
      for (std::size_t i = 0; i < m; ++i) std::swap(a(i, t), a(i, best));
      std::swap(out.piv[t], out.piv[best]);
    }
    // Householder vector for column t.
    Vec v(m, 0.0L);
    Real alpha = 0.0L;
    for (std::size_t i = t; i < m; ++i) alpha += a(i, t) * a(i, t);
    alpha = std::sqrt(alpha);
    if (a(t, t) > 0.0L) alpha = -alpha;
    if (alpha == 0.0L) {
      out.rank = t + 1;
      continue;
    }
    v[t] = a(t, t) - alpha;
    for (std::size_t i = t + 1; i < m; ++i) v[i] = a(i, t);
    Real vtv = 0.0L;
    for (std::size_t i = t; i < m; ++i) vtv += v[i] * v[i];
    if (vtv > 0.0L) {
      for (std::size_t j = t; j < n; ++j) {
        Real s = 0.0L;
        for (std::size_t i = t; i < m; ++i) s += v[i] * a(i, j);
        const Real f = 2.0L * s / vtv;
        for (std::size_t i = t; i < m; ++i) a(i, j) -= f * v[i];
      }
      for (std::size_t j = 0; j < m; ++j) {
        Real s = 0.0L;
        for (std::size_t i = t; i < m; ++i) s += v[i] * out.q(j, i);
        const Real f = 2.0L * s / vtv;
        for (std::size_t i = t; i < m; ++i) out.q(j, i) -= f * v[i];
      }
    }
    a(t, t) = alpha;
    for (std::size_t i = t + 1; i < m; ++i) a(i, t) = 0.0L;
    out.rank = t + 1;
  }
  out.r = std::move(a);
  return out;
}

struct ScaledProblem {
  Mat q;
  Vec qv;
  Mat g;
  Vec h;
  Vec col_scale;   // z_original = z_scaled / col_scale
  Vec row_scale;   // lambda_original = lambda_scaled * cost / row_scale
  Real cost = 1.0L;
};

ScaledProblem equilibrate(const QuadraticProgram& p) {
  const std::size_t n = p.q_vector.size();
  const std::size_t k = p.h_vector.size();
  ScaledProblem s;
  s.q = Mat(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s.q(i, j) = p.q_matrix(i, j);
  s.qv.assign(p.q_vector.begin(), p.q_vector.end());
  s.g = Mat(k, n);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < n; ++j) s.g(i, j) = p.g_matrix(i, j);
  s.h.assign(p.h_vector.begin(), p.h_vector.end());

  s.col_scale.assign(n, 1.0L);
  for (std::size_t j = 0; j < n; ++j) {
    Real c = std::sqrt(std::fabs(s.q(j, j)));
    for (std::size_t i = 0; i < k; ++i) c = std::max(c, std::fabs(s.g(i, j)));
    s.col_scale[j] = c > 0.0L ? c : 1.0L;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s.q(i, j) /= s.col_scale[i] * s.col_scale[j];
  for (std::size_t j = 0; j < n; ++j) s.qv[j] /= s.col_scale[j];
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < n; ++j) s.g(i, j) /= s.col_scale[j];

  s.row_scale.assign(k, 1.0L);
  for (std::size_t i = 0; i < k; ++i) {
    Real r = 0.0L;
    for (std::size_t j = 0; j < n; ++j) r = std::max(r, std::fabs(s.g(i, j)));
    s.row_scale[i] = r > 0.0L ? r : 1.0L;
    for (std::size_t j = 0; j < n; ++j) s.g(i, j) /= s.row_scale[i];
    s.h[i] /= s.row_scale[i];
  }

  Real qmax = 0.0L;
  for (Real v : s.q.data) qmax = std::max(qmax, std::fabs(v));
  for (Real v : s.qv) qmax = std::max(qmax, std::fabs(v));
  s.cost = 1.0L / std::max(1.0L, qmax);
  for (Real& v : s.q.data) v *= s.cost;
  for (Real& v : s.qv) v *= s.cost;
  return s;
}

Real rel_kkt(const ScaledProblem& sp, const Vec& z, const Vec& lam) {
  const std::size_t k = sp.h.size();
  const Vec qz = matvec(sp.q, z);
  const Vec gl = k ? matvec_t(sp.g, lam) : Vec(z.size(), 0.0L);
  Real dscale = 1.0L;
  dscale = std::max(dscale, max_abs(qz));
  dscale = std::max(dscale, max_abs(sp.qv));
  dscale = std::max(dscale, max_abs(gl));
  Real rd = 0.0L;
  for (std::size_t j = 0; j < z.size(); ++j)
    rd = std::max(rd, std::fabs(qz[j] + sp.qv[j] + gl[j]));
  rd /= dscale;
  if (k == 0) return rd;
  const Vec gz = matvec(sp.g, z);
  Real pscale = 1.0L;
  pscale = std::max(pscale, max_abs(gz));
  pscale = std::max(pscale, max_abs(sp.h));
  Real rp = 0.0L, comp = 0.0L, dneg = 0.0L, lmax = 0.0L;
  const Real obj = 0.5L * dot(z, qz) + dot(sp.qv, z);
  for (std::size_t i = 0; i < k; ++i) {
    rp = std::max(rp, gz[i] - sp.h[i]);
    comp = std::max(comp, std::fabs(lam[i] * (sp.h[i] - gz[i])));
    dneg = std::max(dneg, -lam[i]);
    lmax = std::max(lmax, std::fabs(lam[i]));
  }
  rp = std::max(rp, 0.0L) / pscale;
  comp /= std::max(1.0L, std::fabs(obj));
  dneg /= std::max(1.0L, lmax);
  return std::max(std::max(rd, rp), std::max(comp, dneg));
}

// Equality-constrained QP on the active rows via the null-space method.
bool eqp_nullspace(const ScaledProblem& sp, const std::vector<std::size_t>& act,
                   Vec& z_out, Vec& nu_out) {
  const std::size_t n = sp.qv.size();
  const std::size_t ka = act.size();
  if (ka == 0) {
    Mat k(n, n);
    Real diag_max = 1.0L;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) k(i, j) = sp.q(i, j);
      diag_max = std::max(diag_max, std::fabs(sp.q(i, i)));
    }
    for (std::size_t i = 0; i < n; ++i) k(i, i) += 1e-15L * diag_max;
    Vec rhs(n);
    for (std::size_t j = 0; j < n; ++j) rhs[j] = -sp.qv[j];
    if (!ldlt_solve(k, rhs)) return false;
    z_out = std::move(rhs);
    nu_out.clear();
    return true;
  }
  // QR of Ga^T (n x ka).
  Mat gat(n, ka);
  for (std::size_t c = 0; c < ka; ++c)
    for (std::size_t j = 0; j < n; ++j) gat(j, c) = sp.g(act[c], j);
  const PivotedQr qr = pivoted_qr(gat);
  const std::size_t r = qr.rank;
  if (r == 0) return false;

  // Particular solution: R[:r,:r]^T y = ha[piv[:r]], z_part = Q[:, :r] y.
  Vec y(r, 0.0L);
  for (std::size_t i = 0; i < r; ++i) {
    Real v = sp.h[act[qr.piv[i]]];
    for (std::size_t p = 0; p < i; ++p) v -= qr.r(p, i) * y[p];
    if (std::fabs(qr.r(i, i)) < 1e-300L) return false;
    y[i] = v / qr.r(i, i);
  }
  Vec z(n, 0.0L);
  for (std::size_t j = 0; j < n; ++j) {
    Real s = 0.0L;
    for (std::size_t i = 0; i < r; ++i) s += qr.q(j, i) * y[i];
    z[j] = s;
  }
  // Reduced problem over the null space Z = Q[:, r:].
  const std::size_t nz = n - r;
  if (nz > 0) {
    Mat zb(n, nz);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t c = 0; c < nz; ++c) zb(j, c) = qr.q(j, r + c);
    Mat h(nz, nz);
    Real hmax = 1.0L;
    for (std::size_t a = 0; a < nz; ++a)
      for (std::size_t b = 0; b < nz; ++b) {
        Real s = 0.0L;
        for (std::size_t i = 0; i < n; ++i) {
          Real qi = 0.0L;
          for (std::size_t j = 0; j < n; ++j) qi += sp.q(i, j) * zb(j, b);
          s += zb(i, a) * qi;
        }
        h(a, b) = s;
        if (a == b) hmax = std::max(hmax, std::fabs(s));
      }
    for (std::size_t a = 0; a < nz; ++a) h(a, a) += 1e-14L * hmax;
    Vec qz = matvec(sp.q, z);
    Vec rhs(nz, 0.0L);
    for (std::size_t a = 0; a < nz; ++a) {
      Real s = 0.0L;
      for (std::size_t j = 0; j < n; ++j) s += zb(j, a) * (sp.qv[j] + qz[j]);
      rhs[a] = -s;
    }
    if (!ldlt_solve(h, rhs)) return false;
    for (std::size_t j = 0; j < n; ++j) {
      Real s = 0.0L;
      for (std::size_t a = 0; a < nz; ++a) s += zb(j, a) * rhs[a];
      z[j] += s;
    }
  }
  // Multipliers: least-squares Ga^T nu = -(Qz + q) via the same QR.
  Vec qz = matvec(sp.q, z);
  Vec rhs(n, 0.0L);
  for (std::size_t j = 0; j < n; ++j) rhs[j] = -(qz[j] + sp.qv[j]);
  Vec qtr(r, 0.0L);
  for (std::size_t i = 0; i < r; ++i) {
    Real s = 0.0L;
    for (std::size_t j = 0; j < n; ++j) s += qr.q(j, i) * rhs[j];
    qtr[i] = s;
  }
  Vec nu_piv(r, 0.0L);
  for (std::size_t i = r; i-- > 0;) {
    Real v = qtr[i];
    for (std::size_t p = i + 1; p < r; ++p) v -= qr.r(i, p) * nu_piv[p];
    nu_piv[i] = v / qr.r(i, i);
  }
  nu_out.assign(ka, 0.0L);
  for (std::size_t i = 0; i < r; ++i) nu_out[qr.piv[i]] = nu_piv[i];
  z_out = std::move(z);
  return true;
}

bool try_polish(const ScaledProblem& sp, const Vec& z, const Vec& lam, Vec& z_out,
                Vec& lam_out) {
  const std::size_t k = sp.h.size();
  if (k == 0) {
    Vec nu;
    if (!eqp_nullspace(sp, {}, z_out, nu)) return false;
    lam_out.clear();
    return true;
  }
  Real lmax = 0.0L;
  for (Real v : lam) lmax = std::max(lmax, v);
  const Vec gz = matvec(sp.g, z);
  std::vector<std::size_t> act;
  for (std::size_t i = 0; i < k; ++i) {
    const Real slack = sp.h[i] - gz[i];
    if (lam[i] > 1e-7L * std::max(1.0L, lmax) ||
        slack < 1e-7L * (1.0L + std::fabs(sp.h[i])))
      act.push_back(i);
  }
  for (int round = 0; round < 10; ++round) {
    Vec zp, nu;
    if (!eqp_nullspace(sp, act, zp, nu)) return false;
    Real nu_max = 1.0L;
    for (Real v : nu) nu_max = std::max(nu_max, v);
    bool all_nonneg = true;
    for (Real v : nu)
      if (v < -1e-9L * nu_max) {
        all_nonneg = false;
        break;
      }
    if (!all_nonneg) {
      std::vector<std::size_t> next;
      for (std::size_t c = 0; c < act.size(); ++c)
        if (nu[c] > -1e-9L * nu_max) next.push_back(act[c]);
      if (next.size() == act.size()) return false;
      act = std::move(next);
      continue;
    }
    // Polished point must stay feasible for the inactive rows.
    const Vec gzp = matvec(sp.g, zp);
    Real hscale = 1.0L;
    for (Real v : sp.h) hscale = std::max(hscale, std::fabs(v));
    for (std::size_t i = 0; i < k; ++i)
      if (gzp[i] - sp.h[i] > 1e-7L * hscale) return false;
    lam_out.assign(k, 0.0L);
    for (std::size_t c = 0; c < act.size(); ++c)
      lam_out[act[c]] = std::max(nu[c], 0.0L);
    z_out = std::move(zp);
    return true;
  }
  return false;
}

bool farkas_certified(const ScaledProblem& sp, const Vec& lam) {
  Real nl = max_abs(lam);
  if (nl <= 0.0L) return false;
  Vec y(lam.size());
  for (std::size_t i = 0; i < lam.size(); ++i) y[i] = lam[i] / nl;
  const Vec gty = matvec_t(sp.g, y);
  return max_abs(gty) < 1e-10L && dot(sp.h, y) < -1e-10L;
}

}  // namespace

QpSolution solve_qp(const QuadraticProgram& p, const QpSettings& settings) {
  const std::size_t n = p.q_vector.size();
  const std::size_t k = p.h_vector.size();
  if (n < 1) throw DataError("solve_qp: need at least one variable");
  if (p.q_matrix.rows() != n || p.q_matrix.cols() != n)
    throw DataError("solve_qp: Q dimension mismatch");
  if (k > 0 && (p.g_matrix.rows() != k || p.g_matrix.cols() != n))
    throw DataError("solve_qp: G dimension mismatch");

  ScaledProblem sp = equilibrate(p);
  const Real tol = static_cast<Real>(settings.tolerance);

  Vec z(n, 0.0L), s(k, 0.0L), lam(k, 1.0L);
  for (std::size_t i = 0; i < k; ++i) s[i] = std::max(sp.h[i], 1.0L);

  Vec best_z = z, best_lam = lam;
  Real best_res = rel_kkt(sp, z, lam);
  QpStatus status = QpStatus::max_iter;

  for (int it = 0; it < settings.max_iter && k > 0; ++it) {
    const Real res = rel_kkt(sp, z, lam);
    if (res < best_res) {
      best_res = res;
      best_z = z;
      best_lam = lam;
    }
    const Vec qz = matvec(sp.q, z);
    const Vec gl = matvec_t(sp.g, lam);
    Vec rd(n);
    for (std::size_t j = 0; j < n; ++j) rd[j] = qz[j] + sp.qv[j] + gl[j];
    const Vec gz = matvec(sp.g, z);
    Vec rp(k);
    for (std::size_t i = 0; i < k; ++i) rp[i] = gz[i] + s[i] - sp.h[i];
    Real gap = 0.0L;
    for (std::size_t i = 0; i < k; ++i) gap += s[i] * lam[i];
    const Real mu = gap / static_cast<Real>(k);
    const Real obj = 0.5L * dot(z, qz) + dot(sp.qv, z);
    const Real obj_scale = std::max(1.0L, std::fabs(obj));

    if (res < tol && gap < tol * obj_scale) {
      status = QpStatus::optimal;
      break;
    }
    if (max_abs(lam) > 1e10L && farkas_certified(sp, lam)) {
      best_z = z;
      best_lam = lam;
      best_res = res;
      status = QpStatus::infeasible;
      break;
    }
    if (max_abs(lam) > 1e14L || !std::isfinite(static_cast<double>(res))) break;
    if (mu < 1e-10L * obj_scale) {
      Vec zp, lp;
      if (try_polish(sp, z, lam, zp, lp) && rel_kkt(sp, zp, lp) < 1e-12L) {
        best_z = std::move(zp);
        best_lam = std::move(lp);
        best_res = rel_kkt(sp, best_z, best_lam);
        status = QpStatus::optimal;
        break;
      }
    }
    if (mu < 1e-22L * obj_scale) break;

    Vec d(k);
    for (std::size_t i = 0; i < k; ++i)
      d[i] = std::min(lam[i] / std::max(s[i], 1e-300L), 1e16L);
    Mat kmat(n, n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) kmat(a, b) = sp.q(a, b);
    for (std::size_t i = 0; i < k; ++i) {
      const Real di = d[i];
      for (std::size_t a = 0; a < n; ++a) {
        const Real gia = sp.g(i, a);
        if (gia == 0.0L) continue;
        for (std::size_t b = 0; b < n; ++b) kmat(a, b) += di * gia * sp.g(i, b);
      }
    }
    Real kdiag = 1.0L;
    for (std::size_t a = 0; a < n; ++a) kdiag = std::max(kdiag, std::fabs(kmat(a, a)));
    for (std::size_t a = 0; a < n; ++a) kmat(a, a) += 1e-16L * kdiag;

    auto newton = [&](const Vec& rc, Vec& dz, Vec& dlam, Vec& ds) -> bool {
      Vec rhs(n, 0.0L);
      for (std::size_t i = 0; i < k; ++i) {
        const Real w = d[i] * rp[i] - rc[i] / s[i];
        for (std::size_t j = 0; j < n; ++j) rhs[j] += sp.g(i, j) * w;
      }
      for (std::size_t j = 0; j < n; ++j) rhs[j] = -rd[j] - rhs[j];
      if (!ldlt_solve(kmat, rhs)) return false;
      dz = std::move(rhs);
      const Vec gdz = matvec(sp.g, dz);
      dlam.assign(k, 0.0L);
      ds.assign(k, 0.0L);
      for (std::size_t i = 0; i < k; ++i) {
        dlam[i] = d[i] * (gdz[i] + rp[i]) - rc[i] / s[i];
        ds[i] = -rc[i] / lam[i] - (s[i] / lam[i]) * dlam[i];
      }
      return true;
    };
    auto step_limits = [&](const Vec& ds, const Vec& dlam, Real frac, Real& ap,
                           Real& ad) {
      ap = 1.0L;
      ad = 1.0L;
      for (std::size_t i = 0; i < k; ++i) {
        if (ds[i] < 0.0L) ap = std::min(ap, frac * (-s[i] / ds[i]));
        if (dlam[i] < 0.0L) ad = std::min(ad, frac * (-lam[i] / dlam[i]));
      }
    };

    Vec rc(k), dz, dlam, ds;
    for (std::size_t i = 0; i < k; ++i) rc[i] = lam[i] * s[i];
    if (!newton(rc, dz, dlam, ds)) break;
    Real ap, ad;
    step_limits(ds, dlam, 1.0L, ap, ad);
    Real mu_aff = 0.0L;
    for (std::size_t i = 0; i < k; ++i)
      mu_aff += (s[i] + ap * ds[i]) * (lam[i] + ad * dlam[i]);
    mu_aff /= static_cast<Real>(k);
    Real sigma = mu > 0.0L ? mu_aff / mu : 0.0L;
    sigma = std::min(1.0L, std::max(0.0L, sigma));
    sigma = sigma * sigma * sigma;
    for (std::size_t i = 0; i < k; ++i)
      rc[i] = lam[i] * s[i] + ds[i] * dlam[i] - sigma * mu;
    if (!newton(rc, dz, dlam, ds)) break;
    step_limits(ds, dlam, 0.995L, ap, ad);
    for (std::size_t j = 0; j < n; ++j) z[j] += ap * dz[j];
    for (std::size_t i = 0; i < k; ++i) {
      s[i] = std::max(s[i] + ap * ds[i], 1e-300L);
      lam[i] += ad * dlam[i];
    }
  }

  if (k == 0) {
    Vec nu;
    Vec zu;
    if (eqp_nullspace(sp, {}, zu, nu)) {
      best_z = std::move(zu);
      best_lam.clear();
      best_res = rel_kkt(sp, best_z, best_lam);
      status = QpStatus::optimal;
    }
  } else if (status != QpStatus::infeasible && status != QpStatus::optimal) {
    const Real res = rel_kkt(sp, z, lam);
    if (res < best_res) {
      best_res = res;
      best_z = z;
      best_lam = lam;
    }
    Vec zp, lp;
    if (try_polish(sp, best_z, best_lam, zp, lp)) {
      const Real rp2 = rel_kkt(sp, zp, lp);
      if (rp2 < best_res) {
        best_res = rp2;
        best_z = std::move(zp);
        best_lam = std::move(lp);
      }
    }
  }

  QpSolution sol;
  sol.z.resize(n);
  for (std::size_t j = 0; j < n; ++j)
    sol.z[j] = static_cast<double>(best_z[j] / sp.col_scale[j]);
  double obj = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double qi = 0.0;
    for (std::size_t j = 0; j < n; ++j) qi += p.q_matrix(i, j) * sol.z[j];
    obj += 0.5 * sol.z[i] * qi + p.q_vector[i] * sol.z[i];
  }
  sol.objective = obj;
  sol.kkt_residual = static_cast<double>(best_res);
  if (status == QpStatus::infeasible) {
    sol.status = QpStatus::infeasible;
    return sol;
  }
  double prim_viol = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double gz = 0.0;
    for (std::size_t j = 0; j < n; ++j) gz += p.g_matrix(i, j) * sol.z[j];
    prim_viol = std::max(prim_viol, gz - p.h_vector[i]);
  }
  sol.status = (best_res < 1e-9L && prim_viol < 1e-8) ? QpStatus::optimal
                                                      : QpStatus::max_iter;
  return sol;
}

QuadraticProgram build_bias_variance_qp(const MomentCovariance& a, std::size_t dims,
                                        int order, int grid_size,
                                        std::optional<double> bias_cap) {
  if (order < 1) throw DataError("order must be >= 1");
  const std::size_t pn = static_cast<std::size_t>(order) + 1;
  if (a.a.rows() != pn || a.a.cols() != pn)
    throw DataError("moment covariance has wrong dimension for the order");
  if (grid_size < order + 2)
    throw DataError("grid must have at least P + 2 points");
  if (bias_cap && *bias_cap < 0.0) throw DataError("bias cap must be non-negative");

  const std::size_t n = pn + 1;  // gamma_0..gamma_P, u
  const double nd = static_cast<double>(dims);
  QuadraticProgram p;
  p.q_matrix = Matrix(n, n, 0.0);
  // Ridge keeps the covariance block numerically PSD (scaled by its trace).
  const double ridge = 1e-12 * std::max(1.0, a.a.trace() / static_cast<double>(order));
  for (std::size_t i = 0; i < pn; ++i)
    for (std::size_t j = 0; j < pn; ++j)
      p.q_matrix(i, j) = 2.0 * (a.a(i, j) + (i == j ? ridge : 0.0));
  p.q_matrix(pn, pn) = 2.0 * nd * nd;
  p.q_vector.assign(n, 0.0);

  const std::size_t t_count = static_cast<std::size_t>(grid_size);
  const std::size_t rows = 2 * t_count + (bias_cap ? 2 : 0);
  p.g_matrix = Matrix(rows, n, 0.0);
  p.h_vector.assign(rows, 0.0);
  for (std::size_t t = 0; t < t_count; ++t) {
    const double x = static_cast<double>(t) / static_cast<double>(t_count - 1);
    const double sq = std::sqrt(x);
    double xp = 1.0;
    for (std::size_t pcol = 0; pcol < pn; ++pcol) {
      p.g_matrix(2 * t, pcol) = -xp;     // -poly(x) - u <= -sqrt(x)
      p.g_matrix(2 * t + 1, pcol) = xp;  //  poly(x) - u <=  sqrt(x)
      xp *= x;
    }
    p.g_matrix(2 * t, pn) = -1.0;
    p.g_matrix(2 * t + 1, pn) = -1.0;
    p.h_vector[2 * t] = -sq;
    p.h_vector[2 * t + 1] = sq;
  }
  if (bias_cap) {
    p.g_matrix(2 * t_count, pn) = nd;  // N u <= c
    p.h_vector[2 * t_count] = *bias_cap;
    p.g_matrix(2 * t_count + 1, pn) = -1.0;  // u >= 0
    p.h_vector[2 * t_count + 1] = 0.0;
  }
  return p;
}

namespace {

double fine_grid_error(const std::vector<double>& gamma, int grid_size) {
  const std::int64_t fine = 10LL * (grid_size - 1) + 1;
  double worst = 0.0;
  for (std::int64_t t = 0; t < fine; ++t) {
    const double x = static_cast<double>(t) / static_cast<double>(fine - 1);
    double poly = 0.0, xp = 1.0;
    for (double gp : gamma) {
      poly += gp * xp;
      xp *= x;
    }
    worst = std::max(worst, std::fabs(std::sqrt(x) - poly));
  }
  return worst;
}

}  // namespace

CoefficientSolution select_coefficients(const MomentCovariance& a, std::size_t dims,
                                        int order, int grid_size,
                                        std::optional<double> bias_cap) {
  const std::size_t pn = static_cast<std::size_t>(order) + 1;
  const double nd = static_cast<double>(dims);
  std::optional<double> cap_work = bias_cap;
  CoefficientSolution out;
  out.bias_cap = bias_cap;
  out.grid_size = grid_size;

  for (int attempt = 0; attempt < 5; ++attempt) {
    const QuadraticProgram prog =
        build_bias_variance_qp(a, dims, order, grid_size, cap_work);
    const QpSolution sol = solve_qp(prog);
    if (sol.status == QpStatus::infeasible)
      throw InfeasibleError(
          "bias cap is infeasible at this order; increase the cap or P");
    if (sol.status != QpStatus::optimal)
      throw NumericalError("coefficient QP did not converge (kkt residual " +
                           std::to_string(sol.kkt_residual) + ")");
    out.gamma.assign(sol.z.begin(), sol.z.begin() + static_cast<std::ptrdiff_t>(pn));
    out.u = fine_grid_error(out.gamma, grid_size);
    double vt = 0.0;
    for (std::size_t i = 0; i < pn; ++i)
      for (std::size_t j = 0; j < pn; ++j)
        vt += out.gamma[i] * a.a(i, j) * out.gamma[j];
    out.variance = vt;
    if (!bias_cap || nd * out.u <= *bias_cap + 1e-9) return out;
    // The fine grid found slightly more error between the coarse points;
    // tighten the working cap and re-solve.
    const double excess = nd * out.u - *bias_cap;
    cap_work = *cap_work - excess - 1e-12;
    if (*cap_work < 0.0)
      throw InfeasibleError(
          "bias cap is infeasible at this order; increase the cap or P");
  }
  throw InfeasibleError("bias cap could not be certified on the verification grid");
}

}  // namespace shapedist::qp
