#pragma once

#include <Eigen/Core>

#include <vector>

#include "locasso/kernels.hpp"
#include "locasso/problem.hpp"

namespace locasso {

/// Rescaled linear-model view of the localized regression problem at a
/// query point: row i of `design` is w_i * (1, v_i1, ..., v_id) with
/// v_i = (X_i - query)/bandwidth and w_i = sqrt(K(v_i) / (n h^d));
/// `response`_i = w_i * Y_i. Rows outside the kernel window are kept as
/// all-zero rows so indices stay aligned with the dataset; `active_rows`
/// is the compaction view.
struct LocalizedDesign {
  Eigen::VectorXd weights;   // n
  Eigen::VectorXd response;  // n
  Eigen::MatrixXd design;    // n x (d+1)
  Eigen::VectorXd query;
  double bandwidth = 0.0;
  KernelSpec kernel;
  std::vector<Eigen::Index> active_rows;

  bool empty() const { return active_rows.empty(); }
};

/// Build the localized design. The kernel must be selection-stage and
/// nonnegative on its support (the square-root weight is undefined
/// otherwise). A window containing no points is representable but flagged;
/// consumers reject it with EmptyWindowError.
LocalizedDesign build_localized_design(const Dataset& data,
                                       const Eigen::VectorXd& query,
                                       double bandwidth, const KernelSpec& k);

/// Gram matrix of the localized design, symmetrized exactly.
Eigen::MatrixXd design_gram(const LocalizedDesign& ld);

/// Empirical check that the design's singular values sit in the window
/// [ (1/2) sqrt(density_min/2), 2 sqrt(3 density_max/2) ] that makes the
/// localized problem identifiable (and the penalized minimizer unique).
struct SpectralWindowReport {
  double min_singular = 0.0;
  double max_singular = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool holds = false;
};
SpectralWindowReport spectral_window(const LocalizedDesign& ld,
                                     const ProblemConstants& constants);

/// Localized Taylor-remainder vector: component i is
/// w_i * f(X_i) - <design row i, theta*> with theta* assembled from the
/// truth and the bandwidth. Simulation diagnostics only.
Eigen::VectorXd bias_vector(const LocalizedDesign& ld, const TruthSpec& truth);

}  // namespace locasso
