#include "locasso/lasso.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace locasso {

namespace {

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

double sign(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

double kkt_residual_at(const Eigen::MatrixXd& a, const Eigen::VectorXd& residual,
                       const Eigen::VectorXd& theta, double lambda,
                       double zero_tol, Eigen::VectorXd* per_coordinate) {
  const Eigen::Index p = a.cols();
  Eigen::VectorXd corr = a.transpose() * residual;
  double worst = 0.0;
  if (per_coordinate) per_coordinate->resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    double viol;
    if (std::abs(theta[j]) > zero_tol)
      viol = std::abs(corr[j] - lambda * sign(theta[j]));
    else
      viol = std::max(0.0, std::abs(corr[j]) - lambda);
    if (per_coordinate) (*per_coordinate)[j] = viol;
    worst = std::max(worst, viol);
  }
  return worst;
}

}  // namespace

void LassoProblem::validate() const {
  if (design.cols() < 1) throw std::invalid_argument("lasso: need p >= 1");
  if (design.rows() != response.size())
    throw std::invalid_argument("lasso: design rows and response length differ");
  if (!design.allFinite() || !response.allFinite())
    throw std::invalid_argument("lasso: non-finite entries");
  if (lambda < 0) throw std::invalid_argument("lasso: lambda must be >= 0");
}

double lasso_objective(const LassoProblem& problem, const Eigen::VectorXd& theta) {
  return (problem.response - problem.design * theta).squaredNorm() +
         2.0 * problem.lambda * theta.lpNorm<1>();
}

LassoSolution solve_lasso(const LassoProblem& problem, const LassoOptions& opts) {
  problem.validate();
  const Eigen::Index p = problem.design.cols();
  const Eigen::VectorXd col_sq = problem.design.colwise().squaredNorm();

  LassoSolution sol;
  sol.coeffs = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd residual = problem.response;

  double prev_obj = lasso_objective(problem, sol.coeffs);
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    for (Eigen::Index j = 0; j < p; ++j) {
      if (col_sq[j] == 0.0) continue;  // all-zero column stays at 0
      const double old = sol.coeffs[j];
      const double rho = problem.design.col(j).dot(residual) + col_sq[j] * old;
      const double updated = soft_threshold(rho, problem.lambda) / col_sq[j];
      if (updated != old) {
        residual += problem.design.col(j) * (old - updated);
        sol.coeffs[j] = updated;
      }
    }
    ++sol.sweeps;

    const double obj = lasso_objective(problem, sol.coeffs);
    if (obj > prev_obj + 1e-9 * (1.0 + std::abs(prev_obj)))
      throw std::logic_error("solve_lasso: objective increased across a sweep");
    prev_obj = obj;

    double res = kkt_residual_at(problem.design, residual, sol.coeffs,
                                 problem.lambda, opts.zero_tol, nullptr);
    if (res <= opts.kkt_tol) {
      // The in-loop residual is maintained incrementally; certify against a
      // fresh one before declaring convergence.
      residual = problem.response - problem.design * sol.coeffs;
      res = kkt_residual_at(problem.design, residual, sol.coeffs,
                            problem.lambda, opts.zero_tol, nullptr);
      if (res <= opts.kkt_tol) {
        if (opts.trace) sol.trace.push_back({obj, res});
        sol.converged = true;
        break;
      }
    }
    if (opts.trace) sol.trace.push_back({obj, res});
  }

  Eigen::VectorXd fresh = problem.response - problem.design * sol.coeffs;
  sol.kkt_residual = kkt_residual_at(problem.design, fresh, sol.coeffs,
                                     problem.lambda, opts.zero_tol, nullptr);
  sol.objective = lasso_objective(problem, sol.coeffs);
  for (Eigen::Index j = 0; j < p; ++j)
    if (std::abs(sol.coeffs[j]) > opts.zero_tol)
      sol.active_set.push_back(static_cast<int>(j));
  return sol;
}

KktReport check_kkt(const Eigen::VectorXd& coeffs, const LassoProblem& problem,
                    double tol) {
  if (coeffs.size() != problem.design.cols())
    throw std::invalid_argument("check_kkt: coefficient size mismatch");
  KktReport rep;
  const Eigen::VectorXd residual = problem.response - problem.design * coeffs;
  rep.residual = kkt_residual_at(problem.design, residual, coeffs,
                                 problem.lambda, 0.0, &rep.per_coordinate);
  rep.holds = rep.residual <= tol;
  return rep;
}

Eigen::VectorXd brute_force_lasso(const LassoProblem& problem) {
  problem.validate();
  const int p = static_cast<int>(problem.design.cols());
  if (p > 8) throw std::invalid_argument("brute_force_lasso: p must be <= 8");

  long patterns = 1;
  for (int j = 0; j < p; ++j) patterns *= 3;

  Eigen::VectorXd best = Eigen::VectorXd::Zero(p);
  double best_obj = lasso_objective(problem, best);
  std::vector<int> signs(p);

  for (long code = 0; code < patterns; ++code) {
    long rest = code;
    int active = 0;
    for (int j = 0; j < p; ++j) {
      signs[j] = static_cast<int>(rest % 3) - 1;  // -1, 0, +1
      rest /= 3;
      if (signs[j] != 0) ++active;
    }
    if (active == 0) continue;  // the zero vector is already a candidate

    // Stationarity on the active pattern: col_j . (Z - A theta) = lambda s_j.
    Eigen::MatrixXd at(problem.design.rows(), active);
    Eigen::VectorXd rhs(active);
    std::vector<int> cols;
    cols.reserve(active);
    {
      int c = 0;
      for (int j = 0; j < p; ++j) {
        if (signs[j] == 0) continue;
        at.col(c) = problem.design.col(j);
        cols.push_back(j);
        ++c;
      }
    }
    Eigen::MatrixXd gram = at.transpose() * at;
    for (int c = 0; c < active; ++c)
      rhs[c] = at.col(c).dot(problem.response) - problem.lambda * signs[cols[c]];

    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (!lu.isInvertible()) continue;  // singular restricted system: skip
    const Eigen::VectorXd theta_active = lu.solve(rhs);

    // The solved coordinates must not oppose their pattern sign.
    bool feasible = true;
    for (int c = 0; c < active; ++c)
      if (theta_active[c] * signs[cols[c]] < 0) {
        feasible = false;
        break;
      }
    if (!feasible) continue;

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(p);
    for (int c = 0; c < active; ++c) theta[cols[c]] = theta_active[c];

    // Subgradient inequalities on the inactive coordinates.
    const Eigen::VectorXd residual = problem.response - problem.design * theta;
    for (int j = 0; j < p && feasible; ++j)
      if (signs[j] == 0 &&
          std::abs(problem.design.col(j).dot(residual)) > problem.lambda + 1e-10)
        feasible = false;
    if (!feasible) continue;

    const double obj = lasso_objective(problem, theta);
    if (obj < best_obj) {
      best_obj = obj;
      best = theta;
    }
  }
  return best;
}

}  // namespace locasso
