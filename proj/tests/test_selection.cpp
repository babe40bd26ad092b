#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "locasso/errors.hpp"
#include "locasso/rng.hpp"
#include "locasso/selection.hpp"
#include "locasso/simulation.hpp"

using namespace locasso;

TEST_CASE("parameter chooser") {
  SUBCASE("penalty rule") {
    ProblemConstants c;
    c.kernel_bound = 1.0;
    c.density_max = 1.0;
    c.holder_const = 1.0;
    CHECK(penalty_for_bandwidth(c, 0.1) ==
          doctest::Approx(0.8 * std::sqrt(3.0)).epsilon(1e-12));
  }
  SUBCASE("bandwidth from the lipschitz term") {
    ProblemConstants c;
    c.density_min = 1.0;
    c.density_lipschitz = 1.0;
    c.kernel_bound = 1.0;
    c.support_bound = 2;
    c.neighborhood_radius = 1.0;
    c.holder_const = 1.0;
    auto cfg = choose_parameters(c, 0.5);
    CHECK(cfg.bandwidth == doctest::Approx(1.0 / 192.0).epsilon(1e-14));
    CHECK(cfg.strict);
    CHECK(cfg.note.empty());
  }
  SUBCASE("open interval enforced") {
    ProblemConstants c;
    CHECK_THROWS_AS(choose_parameters(c, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(choose_parameters(c, 0.0), std::invalid_argument);
  }
  SUBCASE("vanishing lipschitz constant falls back to the radius") {
    ProblemConstants c;
    c.density_lipschitz = 0.0;
    c.neighborhood_radius = 0.5;
    auto cfg = choose_parameters(c, 0.8);
    CHECK(cfg.bandwidth == doctest::Approx(0.4));
    CHECK_FALSE(cfg.note.empty());

    c.neighborhood_radius = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(choose_parameters(c, 0.8), std::invalid_argument);
  }
}

namespace {

// Noiseless steep ramp in the first coordinate on [-1, 1]^3; f(query) = 0,
// which is one of the cases where the plain procedure is guaranteed.
GeneratorSpec ramp_fixture(std::uint64_t seed) {
  GeneratorSpec spec;
  spec.n = 4000;
  spec.d = 3;
  spec.d_star = 1;
  spec.box_lo = -1.0;
  spec.box_hi = 1.0;
  spec.family = FunctionFamily::affine;
  spec.intercept = 0.0;
  spec.slopes = {10.0};
  spec.f_max = 1.0;
  spec.seed = seed;
  return spec;
}

std::vector<int> brute_force_support(const Dataset& data,
                                     const Eigen::VectorXd& query,
                                     const SelectionConfig& cfg,
                                     const KernelSpec& k, double shift) {
  Dataset working = data;
  working.y.array() += shift;
  auto ld = build_localized_design(working, query, cfg.bandwidth, k);
  LassoProblem problem;
  problem.lambda = cfg.lambda;
  const auto m = static_cast<Eigen::Index>(ld.active_rows.size());
  problem.design.resize(m, ld.design.cols());
  problem.response.resize(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    problem.design.row(r) = ld.design.row(ld.active_rows[r]);
    problem.response[r] = ld.response[ld.active_rows[r]];
  }
  Eigen::VectorXd theta = brute_force_lasso(problem);
  std::vector<int> support;
  for (int j = 1; j < theta.size(); ++j)
    if (std::abs(theta[j]) > 1e-10) support.push_back(j);
  return support;
}

}  // namespace

TEST_CASE("plain selection") {
  SUBCASE("zero responses select nothing") {
    auto spec = ramp_fixture(5);
    auto [data, truth] = generate(spec);
    data.y.setZero();
    auto kernel = uniform_kernel(3);
    SelectionConfig cfg = choose_parameters(
        derive_constants(spec, kernel.envelope_bound), 0.8,
        SelectionProcedure::plain);
    auto out = select_plain(data, spec.effective_query(), cfg, kernel);
    CHECK(out.theta.cwiseAbs().maxCoeff() == 0.0);
    CHECK(out.selected.empty());
  }

  SUBCASE("recovers a steep noiseless ramp, cross-checked by enumeration") {
    auto spec = ramp_fixture(6);
    auto kernel = uniform_kernel(3);
    auto constants = derive_constants(spec, kernel.envelope_bound);
    CHECK(constants.separation_compliant());
    SelectionConfig cfg =
        choose_parameters(constants, 0.8, SelectionProcedure::plain);
    auto [data, truth] = generate(spec);
    auto out = select_plain(data, spec.effective_query(), cfg, kernel);
    CHECK(out.selected == std::vector<int>{1});
    CHECK(out.solution.converged);
    CHECK(brute_force_support(data, spec.effective_query(), cfg, kernel, 0.0) ==
          std::vector<int>{1});
  }

  SUBCASE("inflated penalty empties the selection") {
    auto spec = ramp_fixture(7);
    auto [data, truth] = generate(spec);
    auto kernel = uniform_kernel(3);
    SelectionConfig cfg;
    cfg.procedure = SelectionProcedure::plain;
    cfg.bandwidth = 0.8;
    cfg.lambda = 1e6;
    auto out = select_plain(data, spec.effective_query(), cfg, kernel);
    CHECK(out.selected.empty());
    CHECK(out.theta.cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("empty window surfaces the dedicated error") {
    Dataset data;
    data.x = Eigen::MatrixXd::Constant(10, 3, 50.0);
    data.y = Eigen::VectorXd::Ones(10);
    SelectionConfig cfg;
    cfg.procedure = SelectionProcedure::plain;
    cfg.bandwidth = 0.5;
    cfg.lambda = 0.1;
    CHECK_THROWS_AS(
        select_plain(data, Eigen::VectorXd::Zero(3), cfg, uniform_kernel(3)),
        EmptyWindowError);
  }
}

TEST_CASE("translated selection") {
  SUBCASE("constant zero target keeps only the constant term") {
    GeneratorSpec spec;
    spec.n = 2000;
    spec.d = 2;
    spec.d_star = 0;
    spec.f_max = 1.0;
    spec.seed = 11;
    auto kernel = uniform_kernel(2);
    auto constants = derive_constants(spec, kernel.envelope_bound);
    SelectionConfig cfg = choose_parameters(constants, 0.8);
    auto [data, truth] = generate(spec);
    CHECK(data.y.cwiseAbs().maxCoeff() == 0.0);

    auto out = select_translated(data, spec.effective_query(), cfg, kernel);
    const double shift = constants.f_max + constants.separation * cfg.bandwidth;
    CHECK(out.selected.empty());
    CHECK(out.theta[0] == doctest::Approx(shift).epsilon(0.15));
    CHECK(brute_force_support(data, spec.effective_query(), cfg, kernel, shift) ==
          std::vector<int>{});
  }

  SUBCASE("recovers the ramp support like the plain variant") {
    auto spec = ramp_fixture(6);
    auto kernel = uniform_kernel(3);
    auto constants = derive_constants(spec, kernel.envelope_bound);
    SelectionConfig cfg = choose_parameters(constants, 0.8);
    auto [data, truth] = generate(spec);
    auto out = select_translated(data, spec.effective_query(), cfg, kernel);
    CHECK(out.selected == std::vector<int>{1});
  }

  SUBCASE("zero translation is bit-identical to the plain variant") {
    auto spec = ramp_fixture(8);
    auto [data, truth] = generate(spec);
    auto kernel = uniform_kernel(3);
    SelectionConfig cfg;
    cfg.bandwidth = 0.7;
    cfg.lambda = 0.05;
    cfg.constants.f_max = 0.0;
    cfg.constants.separation = 0.0;
    cfg.procedure = SelectionProcedure::translated;
    auto translated = select_translated(data, spec.effective_query(), cfg, kernel);
    cfg.procedure = SelectionProcedure::plain;
    auto plain = select_plain(data, spec.effective_query(), cfg, kernel);
    CHECK(translated.theta == plain.theta);
    CHECK(translated.selected == plain.selected);
  }
}

TEST_CASE("selection outcomes never include the constant term") {
  auto spec = fixtures::standard_affine(1500, 0.25, 909);
  auto kernel = uniform_kernel(spec.d);
  auto cfg = fixtures::standard_selection(spec);
  auto [data, truth] = generate(spec);
  auto out = select(data, spec.effective_query(), cfg, kernel);
  CHECK(std::abs(out.theta[0]) > 0.0);  // intercept survives the shift
  for (int j : out.selected) {
    CHECK(j >= 1);
    CHECK(j <= spec.d);
  }
}

TEST_CASE("selection is deterministic") {
  auto spec = fixtures::standard_affine(800, 0.5, 404);
  auto kernel = uniform_kernel(spec.d);
  auto cfg = fixtures::standard_selection(spec);
  auto [data, truth] = generate(spec);
  auto a = select(data, spec.effective_query(), cfg, kernel);
  auto b = select(data, spec.effective_query(), cfg, kernel);
  CHECK(a.theta == b.theta);
  CHECK(a.selected == b.selected);
}
