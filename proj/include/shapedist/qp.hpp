#pragma once

#include <optional>
#include <vector>

#include "shapedist/matrix.hpp"
#include "shapedist/moments.hpp"

namespace shapedist::qp {

// minimize 1/2 z'Qz + q'z  subject to  Gz <= h.
struct QuadraticProgram {
  Matrix q_matrix;               // n x n, symmetric PSD (ridge applied by builder)
  std::vector<double> q_vector;  // n
  Matrix g_matrix;               // k x n
  std::vector<double> h_vector;  // k
};

enum class QpStatus { optimal, max_iter, infeasible };

struct QpSolution {
  std::vector<double> z;
  double objective = 0.0;
  // Relative KKT residual of the equilibrated problem (stationarity, primal
  // feasibility, complementarity, dual sign).
  double kkt_residual = 0.0;
  QpStatus status = QpStatus::max_iter;
};

struct QpSettings {
  int max_iter = 200;
  double tolerance = 1e-11;
};

// Dense primal-dual interior point (Mehrotra predictor-corrector) with Ruiz-
// style equilibration and an active-set polish; deterministic given inputs.
QpSolution solve_qp(const QuadraticProgram& p, const QpSettings& settings = {});

// The bias-variance coefficient program on a T-point grid over [0,1]:
// decision vector z = (gamma_0..gamma_P, u), objective gamma'A gamma + N^2 u^2,
// constraints u +- poly(x_t) >= +-sqrt(x_t); optionally N u <= c and u >= 0.
QuadraticProgram build_bias_variance_qp(const MomentCovariance& a, std::size_t dims,
                                        int order, int grid_size,
                                        std::optional<double> bias_cap);

// Solves the program above and packages the result. The reported u is
// re-measured on a 10x finer grid; when a cap is set the solve is re-run with
// a tightened cap until the verified N*u satisfies it.
CoefficientSolution select_coefficients(const MomentCovariance& a, std::size_t dims,
                                        int order, int grid_size,
                                        std::optional<double> bias_cap);

}  // namespace shapedist::qp
