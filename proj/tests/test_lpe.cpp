#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fixtures.hpp"
#include "locasso/lpe.hpp"
#include "locasso/rng.hpp"
#include "locasso/simulation.hpp"

using namespace locasso;

TEST_CASE("monomial basis enumeration") {
  CHECK(monomial_multi_indices(0, 2) == std::vector<std::vector<int>>{{}});
  CHECK(monomial_multi_indices(2, 2) ==
        std::vector<std::vector<int>>{
            {0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}});
  CHECK(monomial_multi_indices(3, 2).size() == 10);
  CHECK(monomial_multi_indices(1, 3).size() == 4);
}

TEST_CASE("fit degree is the largest integer strictly below the exponent") {
  CHECK(lpe_degree(2.0) == 1);
  CHECK(lpe_degree(1.5) == 1);
  CHECK(lpe_degree(2.5) == 2);
  CHECK(lpe_degree(3.0) == 2);
  CHECK_THROWS_AS(lpe_degree(1.0), std::invalid_argument);
}

namespace {

Dataset uniform_data(int n, int d, std::uint64_t seed,
                     const std::function<double(const Eigen::VectorXd&)>& f) {
  Rng rng(seed);
  Dataset data;
  data.x.resize(n, d);
  data.y.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) data.x(i, j) = rng.uniform(-0.5, 0.5);
    data.y[i] = f(data.x.row(i).transpose());
  }
  return data;
}

}  // namespace

TEST_CASE("weighted least squares reproduces polynomial targets") {
  SUBCASE("constants") {
    auto data = uniform_data(300, 3, 21, [](const Eigen::VectorXd&) { return 4.2; });
    LpeConfig cfg;
    cfg.selected = {2};
    cfg.f_max = 10.0;
    auto fit = fit_local_polynomial(data, Eigen::VectorXd::Zero(3), cfg);
    CHECK(fit.unique);
    CHECK(fit.value_at_zero == doctest::Approx(4.2).epsilon(1e-8));
  }
  SUBCASE("affine targets at degree >= 1") {
    auto f = [](const Eigen::VectorXd& t) { return 1.0 - 2.0 * t[0] + 0.7 * t[2]; };
    auto data = uniform_data(500, 3, 22, f);
    LpeConfig cfg;
    cfg.selected = {1, 3};
    cfg.f_max = 10.0;
    auto fit = fit_local_polynomial(data, Eigen::VectorXd::Zero(3), cfg);
    CHECK(fit.unique);
    CHECK(fit.value_at_zero == doctest::Approx(1.0).epsilon(1e-8));
  }
  SUBCASE("coefficients come back in the raw offsets") {
    auto f = [](const Eigen::VectorXd& t) { return 0.3 + 1.5 * t[0]; };
    auto data = uniform_data(400, 1, 23, f);
    LpeConfig cfg;
    cfg.selected = {1};
    cfg.f_max = 10.0;
    auto fit = fit_local_polynomial(data, Eigen::VectorXd::Zero(1), cfg);
    REQUIRE(fit.unique);
    REQUIRE(fit.basis.size() == 2);
    CHECK(fit.coefficients[0] == doctest::Approx(0.3).epsilon(1e-8));
    CHECK(fit.coefficients[1] == doctest::Approx(1.5).epsilon(1e-6));
  }
}

TEST_CASE("underdetermined fits are declared non-unique") {
  auto f = [](const Eigen::VectorXd& t) { return t[0] + t[1]; };
  auto data = uniform_data(2, 2, 31, f);  // 2 points, 3 basis monomials
  LpeConfig cfg;
  cfg.selected = {1, 2};
  cfg.f_max = 1.0;
  auto fit = fit_local_polynomial(data, Eigen::VectorXd::Zero(2), cfg);
  CHECK_FALSE(fit.unique);
  CHECK(fit.value_at_zero == 0.0);
  CHECK(fit.coefficients.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("no points under a compact kernel gives the zero fit plus a note") {
  auto f = [](const Eigen::VectorXd&) { return 1.0; };
  auto data = uniform_data(50, 1, 32, f);
  data.x.array() += 10.0;  // far from the query
  LpeConfig cfg;
  cfg.selected = {1};
  cfg.kernel = "ball_uniform";
  cfg.bandwidth = 0.5;
  cfg.f_max = 2.0;
  auto fit = fit_local_polynomial(data, Eigen::VectorXd::Zero(1), cfg);
  CHECK_FALSE(fit.unique);
  CHECK(fit.value_at_zero == 0.0);
  CHECK_FALSE(fit.note.empty());
}

TEST_CASE("clamping") {
  PolyFit fit;
  fit.unique = true;
  fit.value_at_zero = 5.0;
  CHECK(clamp_estimate(fit, 2.0) == 2.0);
  fit.value_at_zero = -0.3;
  CHECK(clamp_estimate(fit, 2.0) == -0.3);
  fit.value_at_zero = -7.0;
  CHECK(clamp_estimate(fit, 2.0) == -2.0);
  fit.unique = false;
  fit.value_at_zero = 123.0;
  CHECK(clamp_estimate(fit, 2.0) == 0.0);
  CHECK_THROWS_AS(clamp_estimate(fit, 0.0), std::invalid_argument);
}

TEST_CASE("permuting coordinate labels leaves the estimate unchanged") {
  auto f = [](const Eigen::VectorXd& t) {
    return 0.4 + t[0] - 2.0 * t[3] + 0.8 * t[0] * t[3];
  };
  auto data = uniform_data(600, 4, 41, f);
  LpeConfig cfg;
  cfg.smoothness = 2.5;  // degree 2
  cfg.selected = {1, 4};
  cfg.f_max = 10.0;
  auto fit = fit_local_polynomial(data, Eigen::VectorXd::Zero(4), cfg);
  REQUIRE(fit.unique);

  // Swap coordinates 1 and 3 in the data and relabel the selection.
  Dataset permuted = data;
  permuted.x.col(0).swap(permuted.x.col(2));
  LpeConfig cfg2 = cfg;
  cfg2.selected = {3, 4};
  auto fit2 = fit_local_polynomial(permuted, Eigen::VectorXd::Zero(4), cfg2);
  REQUIRE(fit2.unique);
  CHECK(fit2.value_at_zero == doctest::Approx(fit.value_at_zero).epsilon(1e-12));
}

TEST_CASE("polynomial exactness across random configurations") {
  Rng rng(515);
  for (int trial = 0; trial < 12; ++trial) {
    const int d = 2 + static_cast<int>(rng.uniform01() * 4);
    const int k = 1 + static_cast<int>(rng.uniform01() * std::min(3, d));
    const double beta = (trial % 2 == 0) ? 2.0 : 2.5;
    const int degree = lpe_degree(beta);

    std::vector<int> selected(d);
    std::iota(selected.begin(), selected.end(), 1);
    for (int j = d - 1; j > 0; --j)
      std::swap(selected[j], selected[static_cast<int>(rng.uniform01() * (j + 1))]);
    selected.resize(k);
    std::sort(selected.begin(), selected.end());

    auto basis = monomial_multi_indices(k, degree);
    std::vector<double> coeffs(basis.size());
    for (auto& c : coeffs) c = rng.uniform(-2.0, 2.0);
    auto target = [&](const Eigen::VectorXd& t) {
      double v = 0.0;
      for (size_t b = 0; b < basis.size(); ++b) {
        double mono = 1.0;
        for (int c = 0; c < k; ++c)
          for (int e = 0; e < basis[b][c]; ++e) mono *= t[selected[c] - 1];
        v += coeffs[b] * mono;
      }
      return v;
    };

    auto data = uniform_data(800, d, 600 + trial, target);
    LpeConfig cfg;
    cfg.smoothness = beta;
    cfg.selected = selected;
    cfg.f_max = 100.0;
    auto fit = fit_local_polynomial(data, Eigen::VectorXd::Zero(d), cfg);
    REQUIRE(fit.unique);
    CHECK(fit.value_at_zero == doctest::Approx(coeffs[0]).epsilon(1e-6));
  }
}

TEST_CASE("two stage estimation") {
  SUBCASE("noiseless affine target on ten ambient coordinates") {
    GeneratorSpec spec;
    spec.n = 4000;
    spec.d = 10;
    spec.d_star = 2;
    spec.box_lo = -1.0;
    spec.box_hi = 1.0;
    spec.family = FunctionFamily::affine;
    spec.intercept = 3.0;
    spec.slopes = {2.0, -1.0};
    spec.holder_const = 5e-6;
    spec.f_max = 4.0;
    spec.seed = 321;

    auto kernel = uniform_kernel(spec.d);
    auto constants = derive_constants(spec, kernel.envelope_bound);
    CHECK(constants.separation_compliant());

    TwoStageConfig cfg;
    cfg.selection = choose_parameters(constants, 0.9);
    cfg.smoothness = 2.0;
    cfg.f_max = constants.f_max;
    auto [data, truth] = generate(spec);
    auto res = two_stage_estimate(data, spec.effective_query(), cfg);
    CHECK(res.selected == std::vector<int>{1, 2});
    CHECK(res.fhat == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(res.bandwidth ==
          doctest::Approx(lpe_default_bandwidth(4000, 2.0, 2)));
  }

  SUBCASE("zero target passes through both stages exactly") {
    GeneratorSpec spec;
    spec.n = 1000;
    spec.d = 3;
    spec.d_star = 0;
    spec.f_max = 1.0;
    spec.seed = 7;
    auto kernel = uniform_kernel(spec.d);
    auto constants = derive_constants(spec, kernel.envelope_bound);
    TwoStageConfig cfg;
    cfg.selection = choose_parameters(constants, 0.8);
    cfg.f_max = 1.0;
    auto [data, truth] = generate(spec);
    auto res = two_stage_estimate(data, spec.effective_query(), cfg);
    CHECK(res.selected.empty());
    CHECK(res.fhat == 0.0);
  }

  SUBCASE("forced empty selection falls back to the weighted mean") {
    GeneratorSpec spec;
    spec.n = 500;
    spec.d = 2;
    spec.d_star = 0;
    spec.intercept = 0.6;
    spec.f_max = 1.0;
    spec.seed = 99;
    auto [data, truth] = generate(spec);

    TwoStageConfig cfg;
    cfg.selection.bandwidth = 0.4;
    cfg.selection.lambda = 1e6;  // kills every coordinate
    cfg.selection.constants = truth.constants;
    cfg.f_max = 1.0;
    auto res = two_stage_estimate(data, spec.effective_query(), cfg);
    CHECK(res.selected.empty());
    CHECK(res.fhat == doctest::Approx(0.6).epsilon(1e-10));

    cfg.f_max = 0.25;  // now the clamp binds
    auto clamped = two_stage_estimate(data, spec.effective_query(), cfg);
    CHECK(clamped.fhat == 0.25);
  }

  SUBCASE("the estimate never leaves the admissible interval") {
    auto spec = fixtures::rate_polynomial(800, 1.0, 31);
    auto kernel = uniform_kernel(spec.d);
    auto constants = derive_constants(spec, kernel.envelope_bound);
    TwoStageConfig cfg;
    cfg.selection = choose_parameters(constants, 0.9);
    cfg.f_max = constants.f_max;
    for (int rep = 0; rep < 10; ++rep) {
      GeneratorSpec child = spec;
      child.seed = derive_seed(spec.seed, 1, rep);
      auto [data, truth] = generate(child);
      auto res = two_stage_estimate(data, spec.effective_query(), cfg);
      CHECK(std::abs(res.fhat) <= constants.f_max);
    }
  }
}
