#include "locasso/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "locasso/errors.hpp"
#include "locasso/rng.hpp"

namespace locasso {

namespace {

double sup_norm(std::span<const double> u) {
  double m = 0.0;
  for (double v : u) m = std::max(m, std::abs(v));
  return m;
}

double two_norm_sq(std::span<const double> u) {
  double s = 0.0;
  for (double v : u) s += v * v;
  return s;
}

double one_norm(std::span<const double> u) {
  double s = 0.0;
  for (double v : u) s += std::abs(v);
  return s;
}

double unit_ball_volume(int dim) {
  return std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim + 1.0);
}

// Nodes and weights of the k-point Gauss-Legendre rule on [-1, 1],
// by Newton iteration on the Legendre recurrence.
void gauss_legendre(int k, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  nodes.assign(k, 0.0);
  weights.assign(k, 0.0);
  const int m = (k + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (k + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= k; ++j) {
        double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = k * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[k - 1 - i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[k - 1 - i] = weights[i];
  }
}

// Odometer walk over a tensor grid on [-r, r]^dim, calling
// visit(point, weight) at every node. Each axis uses a two-panel
// Gauss-Legendre rule split at 0, so integrands built from |u_j| stay
// smooth panel by panel; per_axis_half points go to each panel.
template <typename Visit>
void tensor_quadrature(int dim, double r, int per_axis_half, Visit&& visit) {
  std::vector<double> base_nodes, base_weights;
  gauss_legendre(per_axis_half, base_nodes, base_weights);
  const int per_axis = 2 * per_axis_half;
  std::vector<double> nodes(per_axis), weights(per_axis);
  for (int i = 0; i < per_axis_half; ++i) {
    const double pos = 0.5 * (base_nodes[i] + 1.0) * r;
    const double w = 0.5 * base_weights[i] * r;
    nodes[per_axis_half + i] = pos;
    weights[per_axis_half + i] = w;
    nodes[per_axis_half - 1 - i] = -pos;
    weights[per_axis_half - 1 - i] = w;
  }

  std::vector<int> idx(dim, 0);
  std::vector<double> u(dim);
  while (true) {
    double w = 1.0;
    for (int j = 0; j < dim; ++j) {
      u[j] = nodes[idx[j]];
      w *= weights[idx[j]];
    }
    visit(std::span<const double>(u), w);
    int j = 0;
    for (; j < dim; ++j) {
      if (++idx[j] < per_axis) break;
      idx[j] = 0;
    }
    if (j == dim) break;
  }
}

constexpr long kQuadraturePointBudget = 30'000'000;

long tensor_point_count(int dim, int per_axis_half) {
  long total = 1;
  for (int j = 0; j < dim; ++j) {
    total *= 2 * per_axis_half;
    if (total > kQuadraturePointBudget) return total;
  }
  return total;
}

Eigen::MatrixXd moment_matrix_pass(const KernelSpec& k, int per_axis) {
  const int d = k.dimension;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d + 1, d + 1);
  tensor_quadrature(d, k.support_radius, per_axis,
                    [&](std::span<const double> u, double w) {
                      const double kv = k.fn(u);
                      if (kv == 0.0) return;
                      const double base = w * kv;
                      m(0, 0) += base;
                      for (int i = 0; i < d; ++i) {
                        m(0, i + 1) += base * u[i];
                        for (int j = i; j < d; ++j)
                          m(i + 1, j + 1) += base * u[i] * u[j];
                      }
                    });
  for (int i = 0; i <= d; ++i)
    for (int j = 0; j < i; ++j) m(i, j) = m(j, i);
  return m;
}

// Deterministic sample of directions on the unit sphere plus the axes.
std::vector<Eigen::VectorXd> sample_directions(int dim, int count) {
  std::vector<Eigen::VectorXd> dirs;
  if (dim == 0) return dirs;
  for (int j = 0; j < dim; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
    e[j] = 1.0;
    dirs.push_back(e);
    dirs.push_back(-e);
  }
  Rng rng(0x646972730a21ull);
  for (int s = 0; s < count; ++s) {
    Eigen::VectorXd v(dim);
    for (int j = 0; j < dim; ++j) v[j] = rng.gaussian();
    double norm = v.norm();
    if (norm > 1e-12) dirs.push_back(v / norm);
  }
  return dirs;
}

}  // namespace

double KernelSpec::evaluate(std::span<const double> u) const {
  if (static_cast<int>(u.size()) != dimension)
    throw std::invalid_argument("kernel '" + name + "': argument has size " +
                                std::to_string(u.size()) + ", expected " +
                                std::to_string(dimension));
  return fn(u);
}

double KernelSpec::evaluate(const Eigen::VectorXd& u) const {
  return evaluate(std::span<const double>(u.data(), u.size()));
}

double uniform_kernel_envelope(int dim) {
  const double d = dim;
  const double p = std::pow(2.0, -d);
  // Sup quantities: |K|, K^2, |K| |u|_1^2, |K| |u|_2^2 over the support.
  double q = std::max({p, p * p, p * d * d, p * d});
  // Square-integral with the 1 + |y|_2^2 weight.
  q = std::max(q, p * (1.0 + d / 3.0));
  // Square-integral with the |u|_1^4 weight: moments of a sum of d
  // independent uniforms on [0, 1].
  const double mu = d / 2.0;
  const double var = d / 12.0;
  const double w4 = d / 80.0 + d * (d - 1.0) / 48.0;
  q = std::max(q, p * (mu * mu * mu * mu + 6.0 * mu * mu * var + w4));
  // Square-integrals against squared basis products peak at the constant
  // pair: integral of K^2 = 2^-d.
  q = std::max(q, p);
  return std::max(1.0, q);
}

KernelSpec uniform_kernel(int dim) {
  if (dim < 1) throw std::invalid_argument("uniform_kernel: dimension must be >= 1");
  const double value = std::pow(2.0, -dim);
  KernelSpec k;
  k.name = "uniform";
  k.dimension = dim;
  k.stage = KernelStage::selection;
  k.support_radius = 1.0;
  k.envelope_bound = uniform_kernel_envelope(dim);
  k.fn = [value](std::span<const double> u) {
    return sup_norm(u) <= 1.0 ? value : 0.0;
  };
  return k;
}

KernelSpec gaussian_truncated_kernel(int dim) {
  if (dim < 0) throw std::invalid_argument("gaussian_truncated_kernel: negative dimension");
  const double norm_const = std::pow(2.0 * std::numbers::pi, -0.5 * dim);
  KernelSpec k;
  k.name = "gaussian_trunc";
  k.dimension = dim;
  k.stage = KernelStage::estimation;
  k.support_radius = 10.0;
  k.radial = true;
  k.fn = [norm_const](std::span<const double> u) {
    const double r2 = two_norm_sq(u);
    if (r2 > 100.0) return 0.0;
    return norm_const * std::exp(-0.5 * r2);
  };
  return k;
}

KernelSpec uniform_ball_kernel(int dim) {
  if (dim < 0) throw std::invalid_argument("uniform_ball_kernel: negative dimension");
  const double value = 1.0 / unit_ball_volume(dim);
  KernelSpec k;
  k.name = "ball_uniform";
  k.dimension = dim;
  k.stage = KernelStage::estimation;
  k.support_radius = 1.0;
  k.radial = true;
  k.fn = [value](std::span<const double> u) {
    return two_norm_sq(u) <= 1.0 ? value : 0.0;
  };
  return k;
}

KernelSpec kernel_by_name(std::string_view name, int dim) {
  if (name == "uniform") return uniform_kernel(dim);
  if (name == "gaussian_trunc") return gaussian_truncated_kernel(dim);
  if (name == "ball_uniform") return uniform_ball_kernel(dim);
  throw std::invalid_argument(
      "unknown kernel '" + std::string(name) +
      "'; expected one of: uniform, gaussian_trunc, ball_uniform");
}

Eigen::MatrixXd moment_matrix(const KernelSpec& k, double tol) {
  if (k.stage != KernelStage::selection)
    throw std::invalid_argument("moment_matrix: selection-stage kernel required");
  if (!(tol > 0)) throw std::invalid_argument("moment_matrix: tol must be > 0");
  if (k.dimension > 6)
    throw QuadratureError(
        "moment_matrix: validation unavailable for dimension > 6 "
        "(tensor quadrature cost is exponential in the dimension)");
  if (!std::isfinite(k.support_radius))
    throw std::invalid_argument("moment_matrix: kernel support must be bounded");

  static constexpr int kAxisSchedule[] = {4, 6, 8, 12, 16, 24, 32};
  Eigen::MatrixXd prev;
  bool have_prev = false;
  for (int per_axis : kAxisSchedule) {
    if (tensor_point_count(k.dimension, per_axis) > kQuadraturePointBudget) break;
    Eigen::MatrixXd cur = moment_matrix_pass(k, per_axis);
    if (have_prev && (cur - prev).cwiseAbs().maxCoeff() <= 0.5 * tol) return cur;
    prev = std::move(cur);
    have_prev = true;
  }
  throw QuadratureError(
      "moment_matrix: quadrature did not reach tol = " + std::to_string(tol) +
      " within the point budget for kernel '" + k.name + "'");
}

SelectionKernelReport validate_selection_kernel(const KernelSpec& k, double tol) {
  if (k.stage != KernelStage::selection)
    throw std::invalid_argument("validate_selection_kernel: selection-stage kernel required");
  SelectionKernelReport rep;
  const int d = k.dimension;

  // Symmetry and support on a deterministic sample.
  rep.symmetric = true;
  rep.supported = true;
  Rng rng(0x73796d6d0a17ull);
  std::vector<double> u(d), nu(d);
  for (int s = 0; s < 4096; ++s) {
    const double scale = (s % 4 == 3) ? 2.0 : 1.0;  // every fourth probe outside
    for (int j = 0; j < d; ++j) {
      u[j] = rng.uniform(-scale, scale);
      nu[j] = -u[j];
    }
    const double kv = k.fn(u);
    if (kv != k.fn(nu)) rep.symmetric = false;
    if (sup_norm(u) > 1.0 && kv != 0.0) rep.supported = false;
  }

  rep.moments = moment_matrix(k, tol);
  double off = 0.0;
  for (int i = 0; i <= d; ++i)
    for (int j = 0; j <= d; ++j)
      if (i != j) off = std::max(off, std::abs(rep.moments(i, j)));
  rep.moments_diagonal = off <= tol;

  // Sup quantities on grid corners plus random interior points.
  double q1 = 0.0, q3 = 0.0, q4 = 0.0;
  auto probe = [&](std::span<const double> p) {
    const double kv = std::abs(k.fn(p));
    q1 = std::max(q1, kv);
    const double n1 = one_norm(p);
    q3 = std::max(q3, kv * n1 * n1);
    q4 = std::max(q4, kv * two_norm_sq(p));
  };
  for (long corner = 0; corner < (1L << std::min(d, 20)); ++corner) {
    for (int j = 0; j < d; ++j) u[j] = (corner >> j) & 1 ? 1.0 : -1.0;
    probe(u);
  }
  for (int s = 0; s < 8192; ++s) {
    for (int j = 0; j < d; ++j) u[j] = rng.uniform(-1.0, 1.0);
    probe(u);
  }

  // Integral quantities by the same tensor quadrature as the moments.
  double q5 = 0.0, q6 = 0.0, q7 = 0.0;
  {
    Eigen::MatrixXd basis_sq = Eigen::MatrixXd::Zero(d + 1, d + 1);
    tensor_quadrature(d, k.support_radius, d <= 4 ? 12 : 6,
                      [&](std::span<const double> p, double w) {
                        const double kv = k.fn(p);
                        if (kv == 0.0) return;
                        const double k2 = w * kv * kv;
                        q5 += k2 * (1.0 + two_norm_sq(p));
                        const double n1 = one_norm(p);
                        q6 += k2 * n1 * n1 * n1 * n1;
                        basis_sq(0, 0) += k2;
                        for (int i = 0; i < d; ++i) {
                          basis_sq(0, i + 1) += k2 * p[i] * p[i];
                          for (int j = i; j < d; ++j)
                            basis_sq(i + 1, j + 1) +=
                                k2 * p[i] * p[i] * p[j] * p[j];
                        }
                      });
    q7 = basis_sq.maxCoeff();
  }

  rep.envelope_quantities = {q1, q1 * q1, q3, q4, q5, q6, q7};
  rep.envelope_max =
      *std::max_element(rep.envelope_quantities.begin(), rep.envelope_quantities.end());
  rep.envelope_ok = k.envelope_bound >= rep.envelope_max - tol;
  rep.pass = rep.symmetric && rep.supported && rep.moments_diagonal && rep.envelope_ok;
  if (!rep.pass) {
    rep.message = std::string("failed:") + (rep.symmetric ? "" : " symmetry") +
                  (rep.supported ? "" : " support") +
                  (rep.moments_diagonal ? "" : " moment-diagonality") +
                  (rep.envelope_ok ? "" : " envelope-bound");
  }
  return rep;
}

EstimationKernelReport validate_estimation_kernel(const KernelSpec& k,
                                                  double beta, double tol) {
  if (k.stage != KernelStage::estimation)
    throw std::invalid_argument("validate_estimation_kernel: estimation-stage kernel required");
  if (!(beta > 1)) throw std::invalid_argument("validate_estimation_kernel: beta must be > 1");
  if (!(tol > 0)) throw std::invalid_argument("validate_estimation_kernel: tol must be > 0");
  EstimationKernelReport rep;
  const int d = k.dimension;
  const double mass_tol = std::max(tol, 1e-6);

  if (d == 0) {
    // Zero-variable kernel: a single atom; mass is its value at the origin.
    rep.mass = k.fn({});
    rep.cap = std::min(rep.mass, 1.0);
    rep.weighted_square = rep.mass * rep.mass;
    rep.weighted_sup = rep.mass;
    rep.pass = std::abs(rep.mass - 1.0) <= mass_tol;
    if (!rep.pass) rep.message = "unit mass violated";
    return rep;
  }
  if (d > 4) {
    rep.message = "validation unavailable for dimension > 4";
    return rep;
  }

  const bool bounded = std::isfinite(k.support_radius);
  const double radius = bounded ? k.support_radius : 12.0;

  // Mass and weighted square integral with refinement; a kernel whose
  // weighted integral keeps growing under refinement is reported unbounded.
  // Radially symmetric kernels integrate in the radius, which handles
  // curved support boundaries exactly; others fall back to the tensor grid.
  double mass_prev = 0.0, wsq_prev = 0.0;
  bool converged = false;
  auto update = [&](double mass, double wsq) {
    if (mass_prev != 0.0 && std::abs(mass - mass_prev) <= 0.5 * mass_tol &&
        std::abs(wsq - wsq_prev) <= std::max(1e-9, 1e-6 * std::abs(wsq)))
      converged = true;
    mass_prev = mass;
    wsq_prev = wsq;
    rep.mass = mass;
    rep.weighted_square = wsq;
    return converged;
  };
  if (k.radial) {
    // surface(S^{d-1}) * integral of g(r) r^(d-1) over [0, radius].
    const double sphere =
        2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
    std::vector<double> nodes, weights;
    gauss_legendre(32, nodes, weights);
    std::vector<double> point(d, 0.0);
    for (int panels : {8, 16, 32}) {
      double mass = 0.0, wsq = 0.0;
      for (int s = 0; s < panels; ++s) {
        const double lo = radius * s / panels;
        const double hi = radius * (s + 1) / panels;
        for (size_t q = 0; q < nodes.size(); ++q) {
          const double r = 0.5 * (hi - lo) * (nodes[q] + 1.0) + lo;
          const double w = 0.5 * (hi - lo) * weights[q];
          point[0] = r;
          const double kv = k.fn(point);
          if (kv == 0.0) continue;
          const double shell = sphere * std::pow(r, d - 1) * w;
          mass += shell * kv;
          wsq += shell * (1.0 + std::pow(r, 4.0 * beta)) * kv * kv;
        }
      }
      if (update(mass, wsq)) break;
    }
  } else {
    for (int per_axis_half : {8, 12, 16, 24, 32}) {
      if (tensor_point_count(d, per_axis_half) > kQuadraturePointBudget) break;
      double mass = 0.0, wsq = 0.0;
      tensor_quadrature(d, radius, per_axis_half,
                        [&](std::span<const double> p, double w) {
                          const double kv = k.fn(p);
                          if (kv == 0.0) return;
                          mass += w * kv;
                          wsq += w * (1.0 + std::pow(two_norm_sq(p), 2.0 * beta)) *
                                 kv * kv;
                        });
      if (update(mass, wsq)) break;
    }
  }
  if (!bounded) {
    // Truncation allowance: what the outer shell still contributes.
    double inner = 0.0;
    tensor_quadrature(d, 0.75 * radius, 32, [&](std::span<const double> p, double w) {
      inner += w * k.fn(p);
    });
    rep.tail_bound = std::abs(rep.mass - inner);
  }

  // Largest c with K >= c on the ball of radius c, by bisection over a
  // deterministic direction sample.
  const auto dirs = sample_directions(d, 64);
  auto min_on_ball = [&](double c) {
    double lo = k.fn(std::vector<double>(d, 0.0));
    for (const auto& dir : dirs)
      for (double frac : {0.25, 0.5, 0.75, 1.0}) {
        Eigen::VectorXd p = dir * (frac * c);
        lo = std::min(lo, k.fn(std::span<const double>(p.data(), p.size())));
      }
    return lo;
  };
  double lo = 0.0, hi = std::min(radius, 4.0);
  if (min_on_ball(hi) >= hi) {
    rep.cap = hi;
  } else {
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (min_on_ball(mid) >= mid)
        lo = mid;
      else
        hi = mid;
    }
    rep.cap = lo;
  }

  // Weighted sup over a deterministic sample of the truncation box.
  Rng rng(0x7375700a2bull);
  std::vector<double> u(d);
  double wsup = (1.0) * k.fn(std::vector<double>(d, 0.0));
  for (int s = 0; s < 16384; ++s) {
    for (int j = 0; j < d; ++j) u[j] = rng.uniform(-radius, radius);
    const double kv = k.fn(u);
    if (kv == 0.0) continue;
    wsup = std::max(wsup, (1.0 + std::pow(two_norm_sq(u), beta)) * kv);
  }
  rep.weighted_sup = wsup;

  const bool mass_ok = std::abs(rep.mass - 1.0) <= mass_tol;
  const bool cap_ok = rep.cap > 1e-6;
  rep.pass = converged && mass_ok && cap_ok && std::isfinite(rep.weighted_square) &&
             std::isfinite(rep.weighted_sup) && rep.tail_bound <= mass_tol;
  if (!rep.pass) {
    rep.message = std::string("failed:") + (converged ? "" : " quadrature-convergence") +
                  (mass_ok ? "" : " unit-mass") + (cap_ok ? "" : " lower-cap") +
                  (rep.tail_bound <= mass_tol ? "" : " truncation-tail");
  }
  return rep;
}

}  // namespace locasso
