#pragma once

#include <Eigen/Core>

#include <array>
#include <functional>
#include <span>
#include <string>
#include <string_view>

namespace locasso {

enum class KernelStage { selection, estimation };

/// A named multivariate kernel. Immutable after construction; safe to share
/// across threads.
///
/// Selection-stage kernels are even, vanish outside the unit sup-norm ball,
/// have a diagonal first-order moment matrix, and carry a validated envelope
/// bound (>= 1) dominating the sup and integral quantities the selection
/// analysis needs. Estimation-stage kernels are densities bounded below near
/// the origin.
struct KernelSpec {
  std::string name;
  int dimension = 1;
  KernelStage stage = KernelStage::selection;
  double support_radius = 1.0;  // sup-norm radius outside which the kernel is 0
  double envelope_bound = 1.0;  // selection kernels only
  bool radial = false;          // value depends on the point only through |u|_2
  std::function<double(std::span<const double>)> fn;

  double evaluate(std::span<const double> u) const;
  double evaluate(const Eigen::VectorXd& u) const;
};

/// K(u) = 2^-d on the closed unit sup-norm ball, 0 elsewhere.
KernelSpec uniform_kernel(int dim);

/// Standard normal density truncated at Euclidean radius 10.
KernelSpec gaussian_truncated_kernel(int dim);

/// Constant density of the unit Euclidean ball.
KernelSpec uniform_ball_kernel(int dim);

/// Lookup by the names accepted in configs: "uniform" (selection stage),
/// "gaussian_trunc", "ball_uniform" (estimation stage).
KernelSpec kernel_by_name(std::string_view name, int dim);

/// Envelope bound stored on uniform_kernel(dim): the exact maximum of the
/// seven selection-stage quantities, floored at 1.
double uniform_kernel_envelope(int dim);

/// Matrix of kernel-weighted products of the affine basis functions
/// 1, u_1, ..., u_d; entry (i,j) = integral of K(u) U_i(u) U_j(u) du.
/// Deterministic tensor Gauss-Legendre quadrature on the support box,
/// refined until successive grids agree within `tol`. dim > 6 is rejected
/// (cost is exponential in dim); quadrature that cannot reach `tol` within
/// the point budget throws QuadratureError.
Eigen::MatrixXd moment_matrix(const KernelSpec& k, double tol);

/// Numeric check of the selection-stage contract.
struct SelectionKernelReport {
  bool pass = false;
  bool symmetric = false;       // K(u) == K(-u) at sampled points
  bool supported = false;       // zero outside the unit sup-norm ball
  bool moments_diagonal = false;
  std::array<double, 7> envelope_quantities{};  // sups and integrals the bound must dominate
  double envelope_max = 0.0;
  bool envelope_ok = false;     // stored bound dominates all seven
  Eigen::MatrixXd moments;
  std::string message;
};
SelectionKernelReport validate_selection_kernel(const KernelSpec& k, double tol);

/// Numeric check of the estimation-stage contract: a positive cap c with
/// K(u) >= c on the ball of radius c, unit mass, finite weighted square
/// integral and weighted sup. Failures come back as a report, not an error.
struct EstimationKernelReport {
  bool pass = false;
  double cap = 0.0;             // largest c found with K >= c on ||u||_2 <= c
  double mass = 0.0;            // integral of K
  double weighted_square = 0.0; // integral of (1 + ||u||^(4 beta)) K^2
  double weighted_sup = 0.0;    // sup of (1 + ||u||^(2 beta)) K
  double tail_bound = 0.0;      // quadrature truncation allowance
  std::string message;
};
EstimationKernelReport validate_estimation_kernel(const KernelSpec& k,
                                                  double beta, double tol);

}  // namespace locasso
