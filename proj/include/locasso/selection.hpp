#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "locasso/kernels.hpp"
#include "locasso/lasso.hpp"
#include "locasso/localized_design.hpp"
#include "locasso/problem.hpp"

namespace locasso {

enum class SelectionProcedure { plain, translated };

/// Bandwidth / penalty pair driving the coordinate-selection stage.
/// `strict` marks parameters derived from the compliance formulas
///   0 < h < density_min / (32 (d0+1) density_lipschitz kernel_bound)  ∧  radius
///   lambda = 8 sqrt(3 kernel_bound density_max) holder_const h
/// A non-strict config carries arbitrary (h, lambda) for exploration and
/// marks its outcomes non-compliant.
struct SelectionConfig {
  double bandwidth = 0.0;
  double lambda = 0.0;
  SelectionProcedure procedure = SelectionProcedure::translated;
  ProblemConstants constants;
  double zero_tol = 1e-10;
  bool strict = false;
  std::string note;
  LassoOptions solver;
};

/// The strict-mode bandwidth upper bound for these constants. Infinite when
/// the Lipschitz term vanishes and the neighborhood radius is infinite.
double bandwidth_bound(const ProblemConstants& constants);

/// The strict-mode penalty for bandwidth h.
double penalty_for_bandwidth(const ProblemConstants& constants, double h);

/// Strict-compliant config with h = h_fraction * bandwidth_bound and the
/// matching penalty. h_fraction must lie in (0, 1): the bound is an open
/// interval. When density_lipschitz = 0 the bound degenerates to the
/// neighborhood radius alone; this is recorded in the config note. Both
/// terms infinite is an error (an explicit bandwidth is required then).
SelectionConfig choose_parameters(const ProblemConstants& constants,
                                  double h_fraction,
                                  SelectionProcedure procedure =
                                      SelectionProcedure::translated);

/// Result of a selection run. `selected` holds 1-based coordinate indices;
/// the constant term (index 0 of theta) never enters it.
struct SelectionOutcome {
  std::vector<int> selected;
  Eigen::VectorXd theta;  // d+1 coefficients, constant term first
  LassoSolution solution;
  SelectionConfig config;
};

/// Penalized localized least squares on the raw responses. Reliable only
/// when |f(query)| is zero or exceeds separation * bandwidth; the translated
/// procedure is the safe default otherwise.
SelectionOutcome select_plain(const Dataset& data, const Eigen::VectorXd& query,
                              const SelectionConfig& cfg, const KernelSpec& k);

/// Same pipeline with responses shifted by f_max + separation * bandwidth,
/// which pins the constant term away from zero regardless of f(query).
SelectionOutcome select_translated(const Dataset& data,
                                   const Eigen::VectorXd& query,
                                   const SelectionConfig& cfg,
                                   const KernelSpec& k);

/// Dispatch on cfg.procedure.
SelectionOutcome select(const Dataset& data, const Eigen::VectorXd& query,
                        const SelectionConfig& cfg, const KernelSpec& k);

}  // namespace locasso
