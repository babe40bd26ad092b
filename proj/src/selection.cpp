#include "locasso/selection.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "locasso/errors.hpp"

namespace locasso {

double bandwidth_bound(const ProblemConstants& c) {
  const double inf = std::numeric_limits<double>::infinity();
  const double lipschitz_term =
      c.density_lipschitz > 0
          ? c.density_min /
                (32.0 * (c.support_bound + 1) * c.density_lipschitz * c.kernel_bound)
          : inf;
  return std::min(lipschitz_term, c.neighborhood_radius);
}

double penalty_for_bandwidth(const ProblemConstants& c, double h) {
  return 8.0 * std::sqrt(3.0 * c.kernel_bound * c.density_max) * c.holder_const * h;
}

SelectionConfig choose_parameters(const ProblemConstants& constants,
                                  double h_fraction, SelectionProcedure procedure) {
  constants.validate();
  if (!(h_fraction > 0.0) || !(h_fraction < 1.0))
    throw std::invalid_argument(
        "choose_parameters: h_fraction must lie in (0, 1); the bandwidth bound "
        "is an open interval");

  const double bound = bandwidth_bound(constants);
  if (std::isinf(bound))
    throw std::invalid_argument(
        "choose_parameters: bandwidth bound is unbounded (density_lipschitz = 0 "
        "and infinite neighborhood_radius); supply an explicit bandwidth");

  SelectionConfig cfg;
  cfg.bandwidth = h_fraction * bound;
  cfg.lambda = penalty_for_bandwidth(constants, cfg.bandwidth);
  cfg.procedure = procedure;
  cfg.constants = constants;
  cfg.strict = true;
  if (constants.density_lipschitz == 0)
    cfg.note = "density_lipschitz = 0: bandwidth bound from neighborhood radius alone";
  return cfg;
}

namespace {

SelectionOutcome run_selection(const Dataset& data, const Eigen::VectorXd& query,
                               const SelectionConfig& cfg, const KernelSpec& k,
                               double shift) {
  if (!(cfg.bandwidth > 0))
    throw std::invalid_argument("select: bandwidth must be > 0");
  if (!(cfg.lambda >= 0))
    throw std::invalid_argument("select: lambda must be >= 0");

  Dataset working = data;
  if (shift != 0.0) working.y.array() += shift;

  LocalizedDesign ld = build_localized_design(working, query, cfg.bandwidth, k);
  if (ld.empty())
    throw EmptyWindowError("select: no data points inside the kernel window");

  // Compacting to the active rows leaves the objective unchanged and keeps
  // the solver away from the zero rows.
  const Eigen::Index m = static_cast<Eigen::Index>(ld.active_rows.size());
  LassoProblem problem;
  problem.lambda = cfg.lambda;
  problem.design.resize(m, ld.design.cols());
  problem.response.resize(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    problem.design.row(r) = ld.design.row(ld.active_rows[r]);
    problem.response[r] = ld.response[ld.active_rows[r]];
  }

  SelectionOutcome out;
  out.config = cfg;
  out.solution = solve_lasso(problem, cfg.solver);
  out.theta = out.solution.coeffs;
  const int d = static_cast<int>(out.theta.size()) - 1;
  for (int j = 1; j <= d; ++j)
    if (std::abs(out.theta[j]) > cfg.zero_tol) out.selected.push_back(j);
  return out;
}

}  // namespace

SelectionOutcome select_plain(const Dataset& data, const Eigen::VectorXd& query,
                              const SelectionConfig& cfg, const KernelSpec& k) {
  if (cfg.procedure != SelectionProcedure::plain)
    throw std::invalid_argument("select_plain: config.procedure mismatch");
  return run_selection(data, query, cfg, k, 0.0);
}

SelectionOutcome select_translated(const Dataset& data,
                                   const Eigen::VectorXd& query,
                                   const SelectionConfig& cfg,
                                   const KernelSpec& k) {
  if (cfg.procedure != SelectionProcedure::translated)
    throw std::invalid_argument("select_translated: config.procedure mismatch");
  const double shift =
      cfg.constants.f_max + cfg.constants.separation * cfg.bandwidth;
  return run_selection(data, query, cfg, k, shift);
}

SelectionOutcome select(const Dataset& data, const Eigen::VectorXd& query,
                        const SelectionConfig& cfg, const KernelSpec& k) {
  return cfg.procedure == SelectionProcedure::plain
             ? select_plain(data, query, cfg, k)
             : select_translated(data, query, cfg, k);
}

}  // namespace locasso
