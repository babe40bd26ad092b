#pragma once

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace locasso {

/// Regression sample: n design points in d dimensions with scalar responses.
struct Dataset {
  Eigen::MatrixXd x;  // n x d
  Eigen::VectorXd y;  // n

  Eigen::Index size() const { return x.rows(); }
  int dim() const { return static_cast<int>(x.cols()); }

  void validate() const {
    if (x.rows() < 1) throw std::invalid_argument("dataset: need n >= 1");
    if (x.rows() != y.size())
      throw std::invalid_argument("dataset: X rows and Y length differ");
    if (!x.allFinite() || !y.allFinite())
      throw std::invalid_argument("dataset: non-finite entries");
  }
};

/// Problem constants the theory treats as known. In simulation they come
/// from the generator; on real data the user must supply them.
struct ProblemConstants {
  double holder_const = 1.0;       // remainder constant of the degree-1 Taylor bound
  double smoothness = 2.0;         // regularity exponent, > 1
  double density_min = 1.0;        // lower bound on the design density near the query
  double density_max = 1.0;        // upper bound (>= 1 by convention)
  double density_lipschitz = 0.0;  // Lipschitz constant of the density near the query
  double neighborhood_radius = 0.5;  // sup-norm radius of the valid neighborhood
  double kernel_bound = 1.0;       // validated envelope bound of the selection kernel, >= 1
  double separation = 1.0;         // lower bound on |df/dx_j| over the active coordinates
  int support_bound = 1;           // known upper bound on the active-set size
  double noise_sd = 0.0;
  double f_max = 1.0;              // bound on |f(query)|

  /// Smallest separation constant compatible with the other fields in
  /// strict mode: 72 * (density_max/density_min) * L * kernel_bound * sqrt(d0).
  double separation_floor() const {
    return 72.0 * (density_max / density_min) * holder_const * kernel_bound *
           std::sqrt(static_cast<double>(support_bound));
  }

  bool separation_compliant() const {
    return separation >= separation_floor();
  }

  void validate() const {
    if (!(holder_const > 0)) throw std::invalid_argument("constants: holder_const must be > 0");
    if (!(smoothness > 1)) throw std::invalid_argument("constants: smoothness must be > 1");
    if (!(density_min > 0) || density_min > density_max)
      throw std::invalid_argument("constants: need 0 < density_min <= density_max");
    if (density_max < 1)
      throw std::invalid_argument("constants: density_max must be >= 1");
    if (density_lipschitz < 0)
      throw std::invalid_argument("constants: density_lipschitz must be >= 0");
    if (!(neighborhood_radius > 0))
      throw std::invalid_argument("constants: neighborhood_radius must be > 0");
    if (kernel_bound < 1) throw std::invalid_argument("constants: kernel_bound must be >= 1");
    if (!(separation > 0)) throw std::invalid_argument("constants: separation must be > 0");
    if (support_bound < 0) throw std::invalid_argument("constants: support_bound must be >= 0");
    if (noise_sd < 0) throw std::invalid_argument("constants: noise_sd must be >= 0");
    if (!(f_max > 0)) throw std::invalid_argument("constants: f_max must be > 0");
  }
};

/// Ground truth of a synthetic instance. Simulation only.
/// Coordinates in `support` are 1-based; the gradient is zero off-support.
struct TruthSpec {
  std::function<double(const Eigen::VectorXd&)> f;
  Eigen::VectorXd gradient_at_query;
  double value_at_query = 0.0;
  std::vector<int> support;
  ProblemConstants constants;
};

}  // namespace locasso
