// src/qp.cpp
#include "codedmec/qp.hpp"

#include "codedmec/errors.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace codedmec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Kind { Lower, Upper, Row };

// n'x >= rhs
struct Constraint {
  Eigen::VectorXd normal;
  double rhs;
  Kind kind;
  Eigen::Index index;
};

std::vector<Constraint> gather(const QpProblem& p) {
  const Eigen::Index n = p.c.size();
  std::vector<Constraint> out;
  for (Eigen::Index i = 0; i < p.lower.size(); ++i) {
    if (!std::isfinite(p.lower(i))) continue;
    out.push_back({Eigen::VectorXd::Unit(n, i), p.lower(i), Kind::Lower, i});
  }
  for (Eigen::Index i = 0; i < p.upper.size(); ++i) {
    if (!std::isfinite(p.upper(i))) continue;
    out.push_back({-Eigen::VectorXd::Unit(n, i), -p.upper(i), Kind::Upper, i});
  }
  for (Eigen::Index j = 0; j < p.A.rows(); ++j) {
    out.push_back({-p.A.row(j).transpose(), -p.b(j), Kind::Row, j});
  }
  return out;
}

void check_shapes(const QpProblem& p) {
  const Eigen::Index n = p.c.size();
  if (p.Q.rows() != n || p.Q.cols() != n) throw std::invalid_argument("qp: Q must be n x n");
  if (p.lower.size() != 0 && p.lower.size() != n) throw std::invalid_argument("qp: lower must have n entries");
  if (p.upper.size() != 0 && p.upper.size() != n) throw std::invalid_argument("qp: upper must have n entries");
  if (p.A.rows() > 0 && p.A.cols() != n) throw std::invalid_argument("qp: A must have n columns");
  if (p.A.rows() != p.b.size()) throw std::invalid_argument("qp: A and b row counts differ");
  for (Eigen::Index i = 0; i < p.lower.size() && i < p.upper.size(); ++i) {
    if (p.lower(i) > p.upper(i)) throw QpError("qp: empty box in coordinate " + std::to_string(i));
  }
}

struct Dual {
  Eigen::VectorXd x;
  std::vector<std::size_t> active;
  std::vector<double> u;
  int iterations = 0;
};

// Goldfarb-Idnani for positive definite Q.
Dual goldfarb_idnani(const Eigen::MatrixXd& Q, const Eigen::VectorXd& c, const std::vector<Constraint>& cons,
                     double tol, int max_iterations) {
  const Eigen::LLT<Eigen::MatrixXd> llt(Q);
  Dual d;
  d.x = -llt.solve(c);

  auto slack = [&](std::size_t i) { return cons[i].normal.dot(d.x) - cons[i].rhs; };

  while (true) {
    std::size_t p = cons.size();
    double worst = -tol;
    for (std::size_t i = 0; i < cons.size(); ++i) {
      const double s = slack(i) / cons[i].normal.norm();
      if (s < worst) {
        worst = s;
        p = i;
      }
    }
    if (p == cons.size()) return d;

    const Eigen::VectorXd& np = cons[p].normal;
    const Eigen::VectorXd qinp = llt.solve(np);
    const double np_scale = np.dot(qinp);
    double up = 0.0;

    while (true) {
      if (++d.iterations > max_iterations) throw QpError("qp: iteration limit reached");
      const auto q = static_cast<Eigen::Index>(d.active.size());
      Eigen::VectorXd z = qinp;
      Eigen::VectorXd r;
      if (q > 0) {
        Eigen::MatrixXd N(np.size(), q);
        for (Eigen::Index j = 0; j < q; ++j) N.col(j) = cons[d.active[static_cast<std::size_t>(j)]].normal;
        const Eigen::MatrixXd qin = llt.solve(N);
        const Eigen::MatrixXd M = N.transpose() * qin;
        r = M.ldlt().solve(qin.transpose() * np);
        z -= qin * r;
      }

      double t1 = kInf;
      Eigen::Index drop = -1;
      for (Eigen::Index j = 0; j < r.size(); ++j) {
        if (r(j) <= 1e-13) continue;
        const double ratio = d.u[static_cast<std::size_t>(j)] / r(j);
        if (ratio < t1) {
          t1 = ratio;
          drop = j;
        }
      }
      const double zn = z.dot(np);
      const double t2 = zn > 1e-12 * np_scale ? -slack(p) / zn : kInf;
      const double t = std::min(t1, t2);
      if (!std::isfinite(t)) throw QpError("qp: constraints are infeasible");

      if (std::isfinite(t2)) d.x += t * z;
      for (Eigen::Index j = 0; j < r.size(); ++j) {
        auto& uj = d.u[static_cast<std::size_t>(j)];
        uj = std::max(0.0, uj - t * r(j));
      }
      up += t;

      if (std::isfinite(t2) && t2 <= t1) {
        d.active.push_back(p);
        d.u.push_back(up);
        break;
      }
      d.active.erase(d.active.begin() + drop);
      d.u.erase(d.u.begin() + drop);
    }
  }
}

bool positive_definite(const Eigen::MatrixXd& Q) {
  if (Q.size() == 0) return true;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(Q);
  if (ldlt.info() != Eigen::Success) return false;
  const Eigen::VectorXd d = ldlt.vectorD();
  const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
  return d.minCoeff() > 1e-10 * scale;
}

QpResult package(const QpProblem& p, const std::vector<Constraint>& cons, const Dual& d) {
  const Eigen::Index n = p.c.size();
  QpResult out;
  out.x = d.x;
  out.objective = 0.5 * d.x.dot(p.Q * d.x) + p.c.dot(d.x);
  out.iterations = d.iterations;
  out.lower_multiplier = Eigen::VectorXd::Zero(n);
  out.upper_multiplier = Eigen::VectorXd::Zero(n);
  out.row_multiplier = Eigen::VectorXd::Zero(p.A.rows());
  for (std::size_t j = 0; j < d.active.size(); ++j) {
    const auto& con = cons[d.active[j]];
    switch (con.kind) {
      case Kind::Lower: out.lower_multiplier(con.index) += d.u[j]; break;
      case Kind::Upper: out.upper_multiplier(con.index) += d.u[j]; break;
      case Kind::Row: out.row_multiplier(con.index) += d.u[j]; break;
    }
  }
  return out;
}

}  // namespace

QpResult qp_solve(const QpProblem& problem, const QpOptions& options) {
  check_shapes(problem);
  const auto cons = gather(problem);
  const Eigen::Index n = problem.c.size();
  const int max_iterations =
      options.max_iterations > 0 ? options.max_iterations : 20 * static_cast<int>(n + static_cast<Eigen::Index>(cons.size())) + 100;

  if (positive_definite(problem.Q)) {
    return package(problem, cons, goldfarb_idnani(problem.Q, problem.c, cons, options.tolerance, max_iterations));
  }

  // Proximal point: each step adds (eps/2)|x - x_k|^2.
  const double eps = std::max(1e-3, 1e-3 * problem.Q.cwiseAbs().maxCoeff());
  const Eigen::MatrixXd Qe = problem.Q + eps * Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd xk = Eigen::VectorXd::Zero(n);
  Dual d;
  int total = 0;
  for (int outer = 0; outer < 10000; ++outer) {
    d = goldfarb_idnani(Qe, problem.c - eps * xk, cons, options.tolerance, max_iterations);
    total += d.iterations;
    const double step = (d.x - xk).norm();
    xk = d.x;
    if (step <= options.tolerance * std::max(1.0, xk.norm())) {
      d.iterations = total;
      return package(problem, cons, d);
    }
  }
  throw QpError("qp: proximal iterations did not converge");
}

double qp_kkt_residual(const QpProblem& problem, const QpResult& result) {
  const Eigen::VectorXd& x = result.x;
  Eigen::VectorXd grad = problem.Q * x + problem.c - result.lower_multiplier + result.upper_multiplier;
  if (problem.A.rows() > 0) grad += problem.A.transpose() * result.row_multiplier;
  double worst = grad.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < problem.lower.size(); ++i) {
    if (!std::isfinite(problem.lower(i))) continue;
    const double gap = x(i) - problem.lower(i);
    worst = std::max({worst, -gap, std::abs(result.lower_multiplier(i) * gap)});
  }
  for (Eigen::Index i = 0; i < problem.upper.size(); ++i) {
    if (!std::isfinite(problem.upper(i))) continue;
    const double gap = problem.upper(i) - x(i);
    worst = std::max({worst, -gap, std::abs(result.upper_multiplier(i) * gap)});
  }
  for (Eigen::Index j = 0; j < problem.A.rows(); ++j) {
    const double gap = problem.b(j) - problem.A.row(j).dot(x);
    worst = std::max({worst, -gap, std::abs(result.row_multiplier(j) * gap)});
  }
  return worst;
}

}  // namespace codedmec
