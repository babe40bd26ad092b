#pragma once

#include <Eigen/Core>

#include <vector>

namespace locasso {

/// Minimize ||response - design * theta||^2 + 2 * lambda * ||theta||_1.
/// Every coordinate is penalized, including the constant term.
struct LassoProblem {
  Eigen::VectorXd response;  // length n
  Eigen::MatrixXd design;    // n x p
  double lambda = 0.0;

  void validate() const;
};

struct LassoOptions {
  int max_sweeps = 100000;
  double kkt_tol = 1e-8;
  double zero_tol = 1e-10;
  bool trace = false;  // record objective and kkt residual per sweep
};

struct SweepTrace {
  double objective;
  double kkt_residual;
};

struct LassoSolution {
  Eigen::VectorXd coeffs;
  double objective = 0.0;      // recomputed from scratch at the returned point
  double kkt_residual = 0.0;   // max coordinate violation of the optimality system
  std::vector<int> active_set; // columns with |coeff| > zero_tol
  int sweeps = 0;
  bool converged = false;
  std::vector<SweepTrace> trace;
};

/// Cyclic coordinate descent with exact univariate soft-threshold updates.
/// Converged means the subgradient optimality system holds within kkt_tol:
///   |col_j . (response - design*theta) - lambda * sign(theta_j)| <= kkt_tol
///     for active coordinates,
///   |col_j . (response - design*theta)| <= lambda + kkt_tol for zeros.
/// Non-convergence within max_sweeps returns converged = false rather than
/// throwing; the caller decides.
LassoSolution solve_lasso(const LassoProblem& problem,
                          const LassoOptions& opts = {});

/// Independent certificate of the same optimality system, computed from
/// scratch. Every test that certifies the solver goes through this.
struct KktReport {
  bool holds = false;
  double residual = 0.0;
  Eigen::VectorXd per_coordinate;
};
KktReport check_kkt(const Eigen::VectorXd& coeffs, const LassoProblem& problem,
                    double tol);

/// Global minimizer by enumeration of all 3^p sign patterns (p <= 8).
/// For each pattern the stationarity system restricted to the active
/// coordinates is solved and the inactive subgradient inequalities checked;
/// the feasible point with minimal objective is returned. Any two minimizers
/// share their fitted values, so objective comparison is sound even when
/// the minimizer is not unique.
Eigen::VectorXd brute_force_lasso(const LassoProblem& problem);

/// Objective value at theta, recomputed directly.
double lasso_objective(const LassoProblem& problem, const Eigen::VectorXd& theta);

}  // namespace locasso
