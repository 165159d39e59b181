// include/codedmec/qp.hpp
//
// Small dense convex QP:
//
//   minimize    1/2 x'Qx + c'x
//   subject to  lower <= x <= upper,  A x <= b
//
// solved with the Goldfarb-Idnani dual active-set method. Infinite bounds are
// ignored. A merely semidefinite Q is handled by proximal-point outer steps.
#pragma once

#include <Eigen/Core>

namespace codedmec {

struct QpProblem {
  Eigen::MatrixXd Q;
  Eigen::VectorXd c;
  Eigen::VectorXd lower;  // empty means -inf
  Eigen::VectorXd upper;  // empty means +inf
  Eigen::MatrixXd A;      // rows x n, may have zero rows
  Eigen::VectorXd b;
};

struct QpOptions {
  double tolerance = 1e-9;
  int max_iterations = 0;  // 0 picks 20 (n + constraints) + 100
};

struct QpResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  int iterations = 0;
  Eigen::VectorXd lower_multiplier;  // >= 0, per variable
  Eigen::VectorXd upper_multiplier;
  Eigen::VectorXd row_multiplier;
};

/// Throws QpError on infeasibility or when the iteration limit is hit.
QpResult qp_solve(const QpProblem& problem, const QpOptions& options = {});

/// Largest of stationarity, primal violation and complementarity at (x, multipliers).
double qp_kkt_residual(const QpProblem& problem, const QpResult& result);

}  // namespace codedmec
