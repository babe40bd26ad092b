#include "locasso/localized_design.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace locasso {

LocalizedDesign build_localized_design(const Dataset& data,
                                       const Eigen::VectorXd& query,
                                       double bandwidth, const KernelSpec& k) {
  data.validate();
  const Eigen::Index n = data.size();
  const int d = data.dim();
  if (query.size() != d)
    throw std::invalid_argument("build_localized_design: query dimension mismatch");
  if (!(bandwidth > 0))
    throw std::invalid_argument("build_localized_design: bandwidth must be > 0");
  if (k.stage != KernelStage::selection)
    throw std::invalid_argument("build_localized_design: selection-stage kernel required");
  if (k.dimension != d)
    throw std::invalid_argument("build_localized_design: kernel dimension mismatch");

  LocalizedDesign ld;
  ld.query = query;
  ld.bandwidth = bandwidth;
  ld.kernel = k;
  ld.weights = Eigen::VectorXd::Zero(n);
  ld.response = Eigen::VectorXd::Zero(n);
  ld.design = Eigen::MatrixXd::Zero(n, d + 1);

  // 1/(n h^d) underflows long before the weights themselves do; switch to
  // log arithmetic when h^d leaves the comfortable range.
  const double log_norm = std::log(static_cast<double>(n)) + d * std::log(bandwidth);
  const bool use_log = std::abs(d * std::log(bandwidth)) > 600.0;
  const double norm = use_log ? 0.0 : 1.0 / (n * std::pow(bandwidth, d));

  Eigen::VectorXd v(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    v = (data.x.row(i).transpose() - query) / bandwidth;
    const double kv = k.evaluate(v);
    if (kv < 0)
      throw std::invalid_argument(
          "build_localized_design: negative kernel value (square-root weight undefined)");
    if (kv == 0.0) continue;
    const double w = use_log ? std::exp(0.5 * (std::log(kv) - log_norm))
                             : std::sqrt(kv * norm);
    ld.weights[i] = w;
    ld.response[i] = w * data.y[i];
    ld.design(i, 0) = w;
    ld.design.row(i).tail(d) = w * v.transpose();
    ld.active_rows.push_back(i);
  }
  return ld;
}

Eigen::MatrixXd design_gram(const LocalizedDesign& ld) {
  Eigen::MatrixXd g = ld.design.transpose() * ld.design;
  if (!g.allFinite())
    throw std::runtime_error("design_gram: non-finite entries (overflow)");
  return 0.5 * (g + g.transpose()).eval();
}

SpectralWindowReport spectral_window(const LocalizedDesign& ld,
                                     const ProblemConstants& constants) {
  SpectralWindowReport rep;
  rep.lower = 0.5 * std::sqrt(constants.density_min / 2.0);
  rep.upper = 2.0 * std::sqrt(3.0 * constants.density_max / 2.0);

  // Singular values of the design via the eigenvalues of its gram matrix.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(design_gram(ld));
  const double lo = std::max(0.0, eig.eigenvalues().minCoeff());
  const double hi = std::max(0.0, eig.eigenvalues().maxCoeff());
  rep.min_singular = std::sqrt(lo);
  rep.max_singular = std::sqrt(hi);
  rep.holds = rep.min_singular >= rep.lower && rep.max_singular <= rep.upper;
  return rep;
}

Eigen::VectorXd bias_vector(const LocalizedDesign& ld, const TruthSpec& truth) {
  const Eigen::Index n = ld.design.rows();
  const int d = static_cast<int>(ld.design.cols()) - 1;
  if (truth.gradient_at_query.size() != d)
    throw std::invalid_argument("bias_vector: gradient dimension mismatch");

  Eigen::VectorXd target(d + 1);
  target[0] = truth.value_at_query;
  target.tail(d) = ld.bandwidth * truth.gradient_at_query;

  Eigen::VectorXd delta = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i : ld.active_rows) {
    // Recover X_i from the stored scaled offsets.
    Eigen::VectorXd xi =
        ld.query + ld.bandwidth * (ld.design.row(i).tail(d) / ld.weights[i]).transpose();
    delta[i] = ld.weights[i] * truth.f(xi) - ld.design.row(i).dot(target);
  }
  return delta;
}

}  // namespace locasso
