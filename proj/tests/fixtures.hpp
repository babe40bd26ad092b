#pragma once

// Synthetic fixtures shared by the test suites and the acceptance runner.

#include <cmath>

#include "locasso/simulation.hpp"

namespace locasso::fixtures {

// d = 10 ambient, two active coordinates, affine target on the unit-volume
// box, query at the center. Slopes sit 5% above the separation floor
// 72 * L * kernel_bound * sqrt(d0) (density ratio is 1 here).
inline GeneratorSpec standard_affine(Eigen::Index n, double sigma,
                                     std::uint64_t seed) {
  GeneratorSpec spec;
  spec.n = n;
  spec.d = 10;
  spec.d_star = 2;
  spec.family = FunctionFamily::affine;
  spec.intercept = 0.25;
  spec.holder_const = 0.005;
  spec.f_max = 0.5;
  spec.support_bound = 2;
  spec.noise_sd = sigma;
  spec.seed = seed;
  const double floor = 72.0 * 0.005 * std::sqrt(2.0);
  spec.slopes = {1.05 * floor, -1.05 * floor};
  return spec;
}

inline SelectionConfig standard_selection(const GeneratorSpec& spec,
                                          double h_fraction = 0.9) {
  const KernelSpec kernel = uniform_kernel(spec.d);
  return choose_parameters(derive_constants(spec, kernel.envelope_bound),
                           h_fraction);
}

// Rate fixture: one active coordinate, quadratic curvature 0.5 (so the
// remainder constant is 0.5), d = 10 ambient.
inline GeneratorSpec rate_polynomial(Eigen::Index n, double sigma,
                                     std::uint64_t seed) {
  GeneratorSpec spec;
  spec.n = n;
  spec.d = 10;
  spec.d_star = 1;
  spec.family = FunctionFamily::polynomial;
  spec.degree = 2;
  spec.intercept = 0.25;
  spec.curvatures = {0.5};
  spec.support_bound = 1;
  spec.f_max = 0.5;
  spec.noise_sd = sigma;
  spec.seed = seed;
  const double floor = 72.0 * 0.5;
  spec.slopes = {1.05 * floor};
  return spec;
}

}  // namespace locasso::fixtures
