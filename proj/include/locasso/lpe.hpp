#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

#include "locasso/kernels.hpp"
#include "locasso/problem.hpp"
#include "locasso/selection.hpp"

namespace locasso {

/// Multi-indices over `vars` variables with total degree <= `degree`,
/// in graded lexicographic order (constant first). vars = 0 yields the
/// single empty index.
std::vector<std::vector<int>> monomial_multi_indices(int vars, int degree);

/// Configuration of the second-stage local polynomial fit on a coordinate
/// subset. The polynomial degree is the largest integer strictly smaller
/// than `smoothness` (so smoothness 2 fits degree 1).
struct LpeConfig {
  double smoothness = 2.0;          // > 1
  std::vector<int> selected;        // 1-based coordinate subset, may be empty
  std::optional<double> bandwidth;  // default n^(-1/(2*smoothness + k))
  std::string kernel = "gaussian_trunc";
  double f_max = 1.0;
  double condition_limit = 1e12;    // normal-matrix condition above which the
                                    // fit is declared non-unique
};

int lpe_degree(double smoothness);
double lpe_default_bandwidth(Eigen::Index n, double smoothness, int selected_count);

/// Weighted least-squares polynomial fit in the selected offsets.
/// `coefficients` maps each multi-index to the coefficient of the
/// corresponding monomial in the raw offsets (query at the origin);
/// a non-unique fit has all coefficients zero and value 0.
struct PolyFit {
  std::vector<std::vector<int>> basis;  // graded lex multi-indices
  Eigen::VectorXd coefficients;         // aligned with basis; empty if !unique
  bool unique = false;
  double value_at_zero = 0.0;
  double bandwidth = 0.0;
  double condition = 0.0;  // condition number of the weighted normal matrix
  Eigen::Index active_points = 0;
  std::string note;  // set when the fit degenerates (e.g. empty kernel window)
};

/// Fit the degree-l polynomial in the selected offset coordinates by
/// kernel-weighted least squares (orthogonal factorization; the normal
/// matrix is formed only for the uniqueness test). An empty selection fits
/// the polynomial in zero variables, i.e. the kernel-weighted mean. No
/// points under a compactly supported kernel gives the non-unique zero fit.
PolyFit fit_local_polynomial(const Dataset& data, const Eigen::VectorXd& query,
                             const LpeConfig& cfg);

/// Projection of the fitted value onto [-f_max, f_max]; a non-unique fit
/// contributes 0, which lies inside any such interval.
double clamp_estimate(const PolyFit& fit, double f_max);

/// Selection followed by estimation: run the translated selector, set the
/// second-stage bandwidth from the selected count, fit, clamp.
struct TwoStageConfig {
  SelectionConfig selection;
  std::string selection_kernel = "uniform";
  double smoothness = 2.0;
  std::string estimation_kernel = "gaussian_trunc";
  std::optional<double> bandwidth_override;
  double f_max = 1.0;
};

struct TwoStageResult {
  double fhat = 0.0;
  std::vector<int> selected;
  PolyFit fit;
  SelectionOutcome selection;
  double bandwidth = 0.0;  // second-stage bandwidth actually used
};

TwoStageResult two_stage_estimate(const Dataset& data,
                                  const Eigen::VectorXd& query,
                                  const TwoStageConfig& cfg);

}  // namespace locasso
