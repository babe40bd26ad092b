#include <doctest.h>

#include <cmath>
#include <vector>

#include "locasso/localized_design.hpp"
#include "locasso/rng.hpp"
#include "locasso/simulation.hpp"

using namespace locasso;

namespace {

Dataset random_dataset(int n, int d, std::uint64_t seed, double lo = -1.0,
                       double hi = 1.0) {
  Rng rng(seed);
  Dataset data;
  data.x.resize(n, d);
  data.y.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) data.x(i, j) = rng.uniform(lo, hi);
    data.y[i] = rng.gaussian();
  }
  return data;
}

}  // namespace

TEST_CASE("weights at coincident points") {
  // All four points sit at the query, so every weight is
  // sqrt(K(0) / (n h^d)) = sqrt(0.5 / 4).
  Dataset data;
  data.x = Eigen::MatrixXd::Zero(4, 1);
  data.y = Eigen::VectorXd::Ones(4);
  auto ld = build_localized_design(data, Eigen::VectorXd::Zero(1), 1.0,
                                   uniform_kernel(1));
  const double expected = std::sqrt(0.5 / 4.0);
  for (int i = 0; i < 4; ++i) {
    CHECK(ld.weights[i] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(ld.design(i, 0) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(ld.design(i, 1) == 0.0);
    CHECK(ld.response[i] == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK(ld.active_rows.size() == 4);
}

TEST_CASE("rows outside the kernel window are exactly zero") {
  Dataset data;
  data.x.resize(3, 2);
  data.x << 0.1, 0.1, 5.0, 0.0, 0.0, -7.0;
  data.y.resize(3);
  data.y << 1.0, 2.0, 3.0;
  auto ld = build_localized_design(data, Eigen::VectorXd::Zero(2), 0.5,
                                   uniform_kernel(2));
  CHECK(ld.active_rows == std::vector<Eigen::Index>{0});
  for (int i : {1, 2}) {
    CHECK(ld.weights[i] == 0.0);
    CHECK(ld.response[i] == 0.0);
    CHECK(ld.design.row(i).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("zero responses give zero output vector") {
  auto data = random_dataset(50, 3, 7);
  data.y.setZero();
  auto ld = build_localized_design(data, Eigen::VectorXd::Zero(3), 0.8,
                                   uniform_kernel(3));
  CHECK(ld.response.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("negative kernel values are rejected") {
  KernelSpec bad = uniform_kernel(1);
  bad.fn = [](std::span<const double>) { return -0.5; };
  Dataset data;
  data.x = Eigen::MatrixXd::Zero(2, 1);
  data.y = Eigen::VectorXd::Ones(2);
  CHECK_THROWS_AS(build_localized_design(data, Eigen::VectorXd::Zero(1), 1.0, bad),
                  std::invalid_argument);
}

TEST_CASE("empty window is representable and flagged") {
  Dataset data;
  data.x = Eigen::MatrixXd::Constant(5, 2, 10.0);
  data.y = Eigen::VectorXd::Ones(5);
  auto ld = build_localized_design(data, Eigen::VectorXd::Zero(2), 0.5,
                                   uniform_kernel(2));
  CHECK(ld.empty());
  CHECK(design_gram(ld).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gram matrix") {
  SUBCASE("single active row gives its outer product") {
    Dataset data;
    data.x.resize(1, 2);
    data.x << 0.2, -0.3;
    data.y.resize(1);
    data.y << 1.5;
    auto ld = build_localized_design(data, Eigen::VectorXd::Zero(2), 1.0,
                                     uniform_kernel(2));
    Eigen::MatrixXd expected =
        ld.design.row(0).transpose() * ld.design.row(0);
    CHECK((design_gram(ld) - expected).cwiseAbs().maxCoeff() < 1e-15);
  }

  SUBCASE("matches the direct sum formula") {
    // Independent oracle: accumulate K(v_i) U_a(v_i) U_b(v_i) / (n h^d)
    // straight from the raw data.
    auto data = random_dataset(200, 3, 99);
    const double h = 0.7;
    auto k = uniform_kernel(3);
    auto ld = build_localized_design(data, Eigen::VectorXd::Zero(3), h, k);
    Eigen::MatrixXd oracle = Eigen::MatrixXd::Zero(4, 4);
    for (int i = 0; i < 200; ++i) {
      Eigen::VectorXd v = data.x.row(i).transpose() / h;
      const double kv = k.evaluate(v);
      if (kv == 0.0) continue;
      Eigen::VectorXd basis(4);
      basis << 1.0, v[0], v[1], v[2];
      oracle += (kv / (200.0 * std::pow(h, 3))) * basis * basis.transpose();
    }
    CHECK((design_gram(ld) - oracle).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("spectral window report") {
  ProblemConstants constants;
  constants.density_min = 1.0;
  constants.density_max = 1.0;

  SUBCASE("zero design fails") {
    Dataset data;
    data.x = Eigen::MatrixXd::Constant(5, 2, 10.0);
    data.y = Eigen::VectorXd::Ones(5);
    auto ld = build_localized_design(data, Eigen::VectorXd::Zero(2), 0.5,
                                     uniform_kernel(2));
    auto rep = spectral_window(ld, constants);
    CHECK_FALSE(rep.holds);
    CHECK(rep.min_singular == 0.0);
  }

  SUBCASE("scaled orthonormal columns sit at s") {
    LocalizedDesign ld;
    ld.design = 0.9 * Eigen::MatrixXd::Identity(4, 3);
    auto rep = spectral_window(ld, constants);
    CHECK(rep.min_singular == doctest::Approx(0.9));
    CHECK(rep.max_singular == doctest::Approx(0.9));
    CHECK(rep.holds);  // 0.9 inside [0.3536, 2.449]

    ld.design = 0.1 * Eigen::MatrixXd::Identity(4, 3);
    CHECK_FALSE(spectral_window(ld, constants).holds);
    ld.design = 3.0 * Eigen::MatrixXd::Identity(4, 3);
    CHECK_FALSE(spectral_window(ld, constants).holds);
  }

  SUBCASE("holds on nearly all compliant draws") {
    // Regression pilot: n=5000, d=3, h=0.5 on the unit-volume box.
    GeneratorSpec spec;
    spec.n = 5000;
    spec.d = 3;
    spec.d_star = 1;
    spec.slopes = {1.0};
    spec.seed = 2024;
    int holds = 0;
    for (int rep = 0; rep < 100; ++rep) {
      GeneratorSpec child = spec;
      child.seed = derive_seed(spec.seed, 3, rep);
      auto [data, truth] = generate(child);
      auto ld = build_localized_design(data, spec.effective_query(), 0.5,
                                       uniform_kernel(3));
      if (spectral_window(ld, truth.constants).holds) ++holds;
    }
    CHECK(holds >= 99);
  }
}

TEST_CASE("localized bias vector") {
  SUBCASE("affine targets have zero bias") {
    auto data = random_dataset(100, 2, 5);
    Eigen::VectorXd query(2);
    query << 0.1, -0.2;
    TruthSpec truth;
    truth.f = [&](const Eigen::VectorXd& t) {
      return 1.0 + 2.0 * (t[0] - 0.1) - 0.5 * (t[1] + 0.2);
    };
    truth.value_at_query = 1.0;
    truth.gradient_at_query = Eigen::VectorXd(2);
    truth.gradient_at_query << 2.0, -0.5;
    auto ld = build_localized_design(data, query, 0.6, uniform_kernel(2));
    CHECK(bias_vector(ld, truth).cwiseAbs().maxCoeff() < 1e-13);
  }

  SUBCASE("quadratic target with one active point") {
    const double h = 0.4;
    Dataset data;
    data.x.resize(3, 2);
    data.x << h / 2.0, 0.0, 5.0, 5.0, -6.0, 2.0;
    data.y = Eigen::VectorXd::Zero(3);
    TruthSpec truth;
    truth.f = [](const Eigen::VectorXd& t) { return t[0] * t[0]; };
    truth.value_at_query = 0.0;
    truth.gradient_at_query = Eigen::VectorXd::Zero(2);
    auto ld = build_localized_design(data, Eigen::VectorXd::Zero(2), h,
                                     uniform_kernel(2));
    auto delta = bias_vector(ld, truth);
    CHECK(delta[0] ==
          doctest::Approx(ld.weights[0] * h * h / 4.0).epsilon(1e-12));
    CHECK(delta[1] == 0.0);
    CHECK(delta[2] == 0.0);
  }

  SUBCASE("weights vanish outside the window") {
    Dataset data;
    data.x = Eigen::MatrixXd::Constant(4, 1, 3.0);
    data.y = Eigen::VectorXd::Zero(4);
    TruthSpec truth;
    truth.f = [](const Eigen::VectorXd& t) { return t[0] * t[0]; };
    truth.gradient_at_query = Eigen::VectorXd::Zero(1);
    auto ld = build_localized_design(data, Eigen::VectorXd::Zero(1), 0.5,
                                     uniform_kernel(1));
    CHECK(bias_vector(ld, truth).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("response scaling leaves the design matrix unchanged") {
  auto data = random_dataset(80, 2, 11);
  auto ld1 = build_localized_design(data, Eigen::VectorXd::Zero(2), 0.7,
                                    uniform_kernel(2));
  Dataset scaled = data;
  scaled.y *= 3.5;
  auto ld2 = build_localized_design(scaled, Eigen::VectorXd::Zero(2), 0.7,
                                    uniform_kernel(2));
  CHECK((ld2.design - ld1.design).cwiseAbs().maxCoeff() == 0.0);
  CHECK((ld2.response - 3.5 * ld1.response).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("localized bias is small on compliant instances") {
  // The squared norm of the bias stays under
  // 2 * density_max * L^2 * kernel_bound * h^2 on smooth fixtures.
  GeneratorSpec spec;
  spec.n = 2000;
  spec.d = 3;
  spec.d_star = 1;
  spec.family = FunctionFamily::polynomial;
  spec.slopes = {2.0};
  spec.curvatures = {0.5};
  spec.seed = 77;
  const double h = 0.4;
  int ok = 0;
  for (int rep = 0; rep < 40; ++rep) {
    GeneratorSpec child = spec;
    child.seed = derive_seed(spec.seed, 9, rep);
    auto [data, truth] = generate(child);
    auto ld = build_localized_design(data, spec.effective_query(), h,
                                     uniform_kernel(3));
    const double bound = 2.0 * truth.constants.density_max *
                         truth.constants.holder_const *
                         truth.constants.holder_const *
                         uniform_kernel(3).envelope_bound * h * h;
    if (bias_vector(ld, truth).squaredNorm() <= bound) ++ok;
  }
  CHECK(ok >= 38);  // statistical regression, recorded seed
}
