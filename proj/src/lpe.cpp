#include "locasso/lpe.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace locasso {

namespace {

void enumerate_compositions(int vars, int total, std::vector<int>& prefix,
                            std::vector<std::vector<int>>& out) {
  if (vars == 1) {
    prefix.push_back(total);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int e = total; e >= 0; --e) {
    prefix.push_back(e);
    enumerate_compositions(vars - 1, total - e, prefix, out);
    prefix.pop_back();
  }
}

double monomial_value(const std::vector<int>& index, const Eigen::VectorXd& v) {
  double r = 1.0;
  for (size_t j = 0; j < index.size(); ++j)
    for (int e = 0; e < index[j]; ++e) r *= v[static_cast<Eigen::Index>(j)];
  return r;
}

}  // namespace

std::vector<std::vector<int>> monomial_multi_indices(int vars, int degree) {
  if (vars < 0 || degree < 0)
    throw std::invalid_argument("monomial_multi_indices: negative argument");
  std::vector<std::vector<int>> out;
  if (vars == 0) {
    out.push_back({});
    return out;
  }
  std::vector<int> prefix;
  for (int t = 0; t <= degree; ++t)
    enumerate_compositions(vars, t, prefix, out);
  return out;
}

int lpe_degree(double smoothness) {
  if (!(smoothness > 1))
    throw std::invalid_argument("lpe_degree: smoothness must be > 1");
  const double f = std::floor(smoothness);
  // Largest integer strictly smaller than the exponent.
  return static_cast<int>(f == smoothness ? f - 1 : f);
}

double lpe_default_bandwidth(Eigen::Index n, double smoothness, int selected_count) {
  return std::pow(static_cast<double>(n),
                  -1.0 / (2.0 * smoothness + selected_count));
}

PolyFit fit_local_polynomial(const Dataset& data, const Eigen::VectorXd& query,
                             const LpeConfig& cfg) {
  data.validate();
  const int d = data.dim();
  if (query.size() != d)
    throw std::invalid_argument("fit_local_polynomial: query dimension mismatch");
  if (!(cfg.f_max > 0))
    throw std::invalid_argument("fit_local_polynomial: f_max must be > 0");
  for (int j : cfg.selected)
    if (j < 1 || j > d)
      throw std::invalid_argument("fit_local_polynomial: selected index " +
                                  std::to_string(j) + " outside 1.." +
                                  std::to_string(d));

  const int k = static_cast<int>(cfg.selected.size());
  const int degree = lpe_degree(cfg.smoothness);
  const double h = cfg.bandwidth.value_or(
      lpe_default_bandwidth(data.size(), cfg.smoothness, k));
  if (!(h > 0))
    throw std::invalid_argument("fit_local_polynomial: bandwidth must be > 0");

  KernelSpec kern = kernel_by_name(cfg.kernel, k);
  if (kern.stage != KernelStage::estimation)
    throw std::invalid_argument("fit_local_polynomial: estimation-stage kernel required");

  PolyFit fit;
  fit.basis = monomial_multi_indices(k, degree);
  fit.bandwidth = h;
  const Eigen::Index m = static_cast<Eigen::Index>(fit.basis.size());
  fit.coefficients = Eigen::VectorXd::Zero(m);

  // Projected, scaled offsets and kernel weights.
  std::vector<Eigen::Index> rows;
  std::vector<Eigen::VectorXd> offsets;
  std::vector<double> weights;
  Eigen::VectorXd v(k);
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (int c = 0; c < k; ++c)
      v[c] = (data.x(i, cfg.selected[c] - 1) - query[cfg.selected[c] - 1]) / h;
    const double w = kern.evaluate(v);
    if (w <= 0.0) continue;
    rows.push_back(i);
    offsets.push_back(v);
    weights.push_back(w);
  }
  fit.active_points = static_cast<Eigen::Index>(rows.size());

  if (rows.empty()) {
    fit.unique = false;
    fit.condition = std::numeric_limits<double>::infinity();
    fit.note = "no data points under the estimation kernel; returning the zero fit";
    return fit;
  }

  Eigen::MatrixXd design(fit.active_points, m);
  Eigen::VectorXd target(fit.active_points);
  for (Eigen::Index r = 0; r < fit.active_points; ++r) {
    const double sw = std::sqrt(weights[static_cast<size_t>(r)]);
    for (Eigen::Index c = 0; c < m; ++c)
      design(r, c) =
          sw * monomial_value(fit.basis[static_cast<size_t>(c)],
                              offsets[static_cast<size_t>(r)]);
    target[r] = sw * data.y[rows[static_cast<size_t>(r)]];
  }

  // Uniqueness is decided on the normal matrix; the solve itself goes
  // through an orthogonal factorization of the weighted design.
  Eigen::MatrixXd normal = design.transpose() * design;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normal);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  fit.condition = lo > 0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (fit.active_points < m || !(fit.condition <= cfg.condition_limit)) {
    fit.unique = false;
    return fit;
  }

  const Eigen::VectorXd scaled = design.colPivHouseholderQr().solve(target);
  // Back to coefficients in the raw offsets: divide by h^|s|.
  for (Eigen::Index c = 0; c < m; ++c) {
    int total = 0;
    for (int e : fit.basis[static_cast<size_t>(c)]) total += e;
    fit.coefficients[c] = scaled[c] / std::pow(h, total);
  }
  fit.unique = true;
  fit.value_at_zero = fit.coefficients[0];  // constant term is first in graded lex
  return fit;
}

double clamp_estimate(const PolyFit& fit, double f_max) {
  if (!(f_max > 0)) throw std::invalid_argument("clamp_estimate: f_max must be > 0");
  if (!fit.unique) return 0.0;
  return std::clamp(fit.value_at_zero, -f_max, f_max);
}

TwoStageResult two_stage_estimate(const Dataset& data,
                                  const Eigen::VectorXd& query,
                                  const TwoStageConfig& cfg) {
  KernelSpec sel_kernel = kernel_by_name(cfg.selection_kernel, data.dim());
  SelectionConfig sel_cfg = cfg.selection;
  sel_cfg.procedure = SelectionProcedure::translated;

  TwoStageResult out;
  out.selection = select_translated(data, query, sel_cfg, sel_kernel);
  out.selected = out.selection.selected;

  LpeConfig lpe;
  lpe.smoothness = cfg.smoothness;
  lpe.selected = out.selected;
  lpe.bandwidth = cfg.bandwidth_override;
  lpe.kernel = cfg.estimation_kernel;
  lpe.f_max = cfg.f_max;
  out.fit = fit_local_polynomial(data, query, lpe);
  out.bandwidth = out.fit.bandwidth;
  out.fhat = clamp_estimate(out.fit, cfg.f_max);
  return out;
}

}  // namespace locasso
