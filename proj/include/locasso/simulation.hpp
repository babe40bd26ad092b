#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "locasso/lpe.hpp"
#include "locasso/problem.hpp"
#include "locasso/selection.hpp"

namespace locasso {

enum class FunctionFamily { affine, polynomial, smooth };

/// Recipe for a synthetic instance: uniform-box design, a target depending
/// only on the coordinates in `support`, additive gaussian noise.
/// Deterministic given `seed`.
struct GeneratorSpec {
  Eigen::Index n = 0;
  int d = 1;
  int d_star = 1;

  double box_lo = -0.5;
  double box_hi = 0.5;

  FunctionFamily family = FunctionFamily::affine;
  double intercept = 0.0;
  std::vector<double> slopes;      // aligned with support
  std::vector<double> curvatures;  // polynomial / smooth families
  int degree = 2;                  // polynomial family, >= 2
  double smooth_omega = 2.0;       // smooth family frequency

  std::vector<int> support;  // 1-based; default {1, ..., d_star}
  double noise_sd = 0.0;
  std::uint64_t seed = 0;
  Eigen::VectorXd x_query;  // default: box center

  // Constants not derivable from the recipe itself.
  double smoothness = 2.0;
  double holder_const = 0.0;  // 0: derive from the family
  double f_max = 0.0;         // 0: derive from |f(query)|
  int support_bound = 0;      // 0: d_star

  std::vector<int> effective_support() const;
  Eigen::VectorXd effective_query() const;
  void validate() const;
};

/// Draw the dataset and its ground truth. Two calls with the same spec are
/// bit-identical. The kernel envelope bound in the returned constants is a
/// placeholder 1; derive_constants overrides it for a concrete kernel.
std::pair<Dataset, TruthSpec> generate(const GeneratorSpec& spec);

/// Problem constants implied by the generator recipe and the chosen
/// selection kernel. The box density gives density_min = 1/volume and
/// density_max = max(1, 1/volume); the neighborhood radius is the sup-norm
/// distance from the query to the box boundary.
ProblemConstants derive_constants(const GeneratorSpec& spec, double kernel_envelope);

struct ReplicateRecord {
  int grid_index = 0;
  int replicate = 0;
  std::uint64_t child_seed = 0;
  Eigen::Index n = 0;
  std::vector<int> selected;
  bool recovered = false;
  int misses = 0;
  int false_includes = 0;
  bool converged = false;
  double kkt_residual = 0.0;
  double fhat = 0.0;
  double true_value = 0.0;
  double sq_error = 0.0;
};

struct ExperimentSummary {
  double recovery_rate = 0.0;
  std::vector<int> miss_counts;   // per coordinate, 1-based at index-1
  std::vector<int> false_counts;  // per coordinate
  double mse_at_query = 0.0;
  std::vector<ReplicateRecord> replicates;
  std::vector<Eigen::Index> grid_n;       // rate experiments
  std::vector<double> grid_mse;           // rate experiments
  std::vector<double> grid_recovery;      // rate experiments
  std::optional<double> rate_slope;
  std::optional<double> rate_slope_se;
  std::vector<std::string> warnings;
};

/// Repeated selection runs with per-replicate child seeds derived from the
/// master seed. Aggregation is order-independent, so the summary does not
/// depend on `jobs`.
ExperimentSummary run_selection_experiment(const GeneratorSpec& spec,
                                           const SelectionConfig& cfg,
                                           const KernelSpec& kernel,
                                           int replicates, int jobs = 1);

/// Two-stage runs over an increasing sample-size grid; fits the slope of
/// log mean-squared-error against log n. Grid points with mse exactly 0
/// are excluded with a warning; fewer than 3 surviving points is an error.
ExperimentSummary run_rate_experiment(const GeneratorSpec& spec_template,
                                      const TwoStageConfig& cfg,
                                      const std::vector<Eigen::Index>& n_grid,
                                      int replicates_per_n, int jobs = 1);

/// Least-squares slope of log(values) on log(sizes); optional standard error.
double fit_loglog_slope(const std::vector<double>& sizes,
                        const std::vector<double>& values,
                        double* standard_error = nullptr);

struct ComplianceCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};
struct ComplianceReport {
  std::vector<ComplianceCheck> checks;
  bool all_pass = false;
};

/// Evaluate the dimension-regime inequalities, the strict parameter
/// equalities, and the derivative-separation requirement for a recipe and
/// a selection config. Reporting only; nothing throws.
ComplianceReport compliance_report(const GeneratorSpec& spec,
                                   const SelectionConfig& cfg);

/// Declarative experiment description (the canonical JSON schema in io.hpp).
struct SelectionSettings {
  std::string kernel = "uniform";
  SelectionProcedure procedure = SelectionProcedure::translated;
  bool strict = true;
  double h_fraction = 0.5;
  std::optional<double> bandwidth;  // explicit-parameter (non-strict) mode
  std::optional<double> lambda;
  double zero_tol = 1e-10;
};

struct EstimationSettings {
  double smoothness = 2.0;
  std::string kernel = "gaussian_trunc";
  std::optional<double> bandwidth;
  std::optional<double> f_max;
};

struct ExperimentConfig {
  std::string kind;  // "selection" or "rate"
  int replicates = 1;
  std::uint64_t seed = 0;
  bool seed_provided = false;
  int jobs = 1;
  GeneratorSpec generator;
  SelectionSettings selection;
  EstimationSettings estimation;
  std::vector<Eigen::Index> n_grid;
};

struct ExperimentRun {
  ExperimentSummary summary;
  SelectionConfig selection;
  ComplianceReport compliance;
};

/// Resolve the declarative config (derive constants, build kernels, pick
/// strict or explicit parameters) and run it.
SelectionConfig resolve_selection_config(const ExperimentConfig& config);
ExperimentRun run_experiment(const ExperimentConfig& config);

}  // namespace locasso
