#include "locasso/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

#include "locasso/rng.hpp"

namespace locasso {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// Index-addressed parallel loop: every task writes only its own slot, so
// results are independent of scheduling.
void parallel_for(int total, int jobs, const std::function<void(int)>& body) {
  jobs = std::clamp(jobs, 1, std::max(total, 1));
  if (jobs == 1) {
    for (int i = 0; i < total; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (int t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < total; i = next.fetch_add(1)) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

std::vector<int> GeneratorSpec::effective_support() const {
  if (!support.empty()) return support;
  std::vector<int> s(d_star);
  std::iota(s.begin(), s.end(), 1);
  return s;
}

Eigen::VectorXd GeneratorSpec::effective_query() const {
  if (x_query.size() > 0) return x_query;
  return Eigen::VectorXd::Constant(d, 0.5 * (box_lo + box_hi));
}

void GeneratorSpec::validate() const {
  if (n < 1) throw std::invalid_argument("generator: n must be >= 1");
  if (d < 1) throw std::invalid_argument("generator: d must be >= 1");
  if (d_star < 0 || d_star > d)
    throw std::invalid_argument("generator: need 0 <= d_star <= d");
  if (!(box_lo < box_hi))
    throw std::invalid_argument("generator: need box_lo < box_hi");
  const auto sup = effective_support();
  if (static_cast<int>(sup.size()) != d_star)
    throw std::invalid_argument("generator: support size must equal d_star");
  for (size_t i = 0; i < sup.size(); ++i) {
    if (sup[i] < 1 || sup[i] > d)
      throw std::invalid_argument("generator: support indices must lie in 1..d");
    if (i > 0 && sup[i] <= sup[i - 1])
      throw std::invalid_argument("generator: support must be strictly increasing");
  }
  if (static_cast<int>(slopes.size()) != d_star)
    throw std::invalid_argument("generator: slopes size must equal d_star");
  if (!curvatures.empty() && static_cast<int>(curvatures.size()) != d_star)
    throw std::invalid_argument("generator: curvatures size must equal d_star or 0");
  if (family == FunctionFamily::polynomial && degree < 2)
    throw std::invalid_argument("generator: polynomial degree must be >= 2");
  if (noise_sd < 0) throw std::invalid_argument("generator: noise_sd must be >= 0");
  if (!(smoothness > 1)) throw std::invalid_argument("generator: smoothness must be > 1");
  if (x_query.size() > 0) {
    if (x_query.size() != d)
      throw std::invalid_argument("generator: x_query dimension mismatch");
    for (int j = 0; j < d; ++j)
      if (!(x_query[j] > box_lo && x_query[j] < box_hi))
        throw std::invalid_argument(
            "generator: x_query must lie strictly inside the design box");
  }
}

namespace {

std::function<double(const Eigen::VectorXd&)> make_target(const GeneratorSpec& spec) {
  const auto sup = spec.effective_support();
  const Eigen::VectorXd query = spec.effective_query();
  std::vector<double> curv = spec.curvatures;
  if (curv.empty()) curv.assign(sup.size(), 0.0);
  const std::vector<double> slopes = spec.slopes;
  const double intercept = spec.intercept;
  const int degree = spec.degree;
  const double omega = spec.smooth_omega;
  const FunctionFamily family = spec.family;

  return [=](const Eigen::VectorXd& t) {
    double value = intercept;
    for (size_t k = 0; k < sup.size(); ++k) {
      const double u = t[sup[k] - 1] - query[sup[k] - 1];
      value += slopes[k] * u;
      switch (family) {
        case FunctionFamily::affine:
          break;
        case FunctionFamily::polynomial:
          value += curv[k] * std::pow(u, degree);
          break;
        case FunctionFamily::smooth:
          value += curv[k] * (1.0 - std::cos(omega * u));
          break;
      }
    }
    return value;
  };
}

double default_holder_const(const GeneratorSpec& spec) {
  double max_curv = 0.0;
  for (double c : spec.curvatures) max_curv = std::max(max_curv, std::abs(c));
  switch (spec.family) {
    case FunctionFamily::affine:
      return 0.01;  // exact first-order Taylor fit: any positive constant works
    case FunctionFamily::polynomial:
      return max_curv > 0 ? max_curv : 0.01;
    case FunctionFamily::smooth:
      return max_curv > 0 ? 0.5 * max_curv * spec.smooth_omega * spec.smooth_omega
                          : 0.01;
  }
  return 0.01;
}

}  // namespace

ProblemConstants derive_constants(const GeneratorSpec& spec, double kernel_envelope) {
  spec.validate();
  const Eigen::VectorXd query = spec.effective_query();
  const double density = std::pow(spec.box_hi - spec.box_lo, -spec.d);

  ProblemConstants c;
  c.density_min = density;
  c.density_max = std::max(1.0, density);
  c.density_lipschitz = 0.0;
  double radius = std::numeric_limits<double>::infinity();
  for (int j = 0; j < spec.d; ++j)
    radius = std::min({radius, query[j] - spec.box_lo, spec.box_hi - query[j]});
  c.neighborhood_radius = radius;
  c.holder_const =
      spec.holder_const > 0 ? spec.holder_const : default_holder_const(spec);
  c.smoothness = spec.smoothness;
  c.kernel_bound = kernel_envelope;
  double min_slope = std::numeric_limits<double>::infinity();
  for (double s : spec.slopes) min_slope = std::min(min_slope, std::abs(s));
  c.separation = spec.slopes.empty() ? 1.0 : min_slope;
  c.support_bound = spec.support_bound > 0 ? spec.support_bound : std::max(spec.d_star, 1);
  c.noise_sd = spec.noise_sd;
  c.f_max = spec.f_max > 0 ? spec.f_max : std::max(1.0, 1.25 * std::abs(spec.intercept));
  if (std::abs(spec.intercept) > c.f_max)
    throw std::invalid_argument("generator: |f(query)| exceeds f_max");
  c.validate();
  return c;
}

std::pair<Dataset, TruthSpec> generate(const GeneratorSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  Dataset data;
  data.x.resize(spec.n, spec.d);
  for (Eigen::Index i = 0; i < spec.n; ++i)
    for (int j = 0; j < spec.d; ++j)
      data.x(i, j) = rng.uniform(spec.box_lo, spec.box_hi);

  TruthSpec truth;
  truth.f = make_target(spec);
  truth.support = spec.effective_support();
  truth.value_at_query = spec.intercept;
  truth.gradient_at_query = Eigen::VectorXd::Zero(spec.d);
  for (size_t k = 0; k < truth.support.size(); ++k)
    truth.gradient_at_query[truth.support[k] - 1] = spec.slopes[k];
  truth.constants = derive_constants(spec, 1.0);

  data.y.resize(spec.n);
  for (Eigen::Index i = 0; i < spec.n; ++i) {
    double y = truth.f(data.x.row(i).transpose());
    if (spec.noise_sd > 0) y += spec.noise_sd * rng.gaussian();
    data.y[i] = y;
  }
  return {std::move(data), std::move(truth)};
}

namespace {

void score_selection(const std::vector<int>& selected,
                     const std::vector<int>& truth_support,
                     ReplicateRecord& rec) {
  rec.selected = selected;
  rec.misses = 0;
  rec.false_includes = 0;
  for (int j : truth_support)
    if (!std::binary_search(selected.begin(), selected.end(), j)) ++rec.misses;
  for (int j : selected)
    if (!std::binary_search(truth_support.begin(), truth_support.end(), j))
      ++rec.false_includes;
  rec.recovered = rec.misses == 0 && rec.false_includes == 0;
}

}  // namespace

ExperimentSummary run_selection_experiment(const GeneratorSpec& spec,
                                           const SelectionConfig& cfg,
                                           const KernelSpec& kernel,
                                           int replicates, int jobs) {
  spec.validate();
  if (replicates < 1)
    throw std::invalid_argument("run_selection_experiment: replicates must be >= 1");

  const auto truth_support = spec.effective_support();
  const Eigen::VectorXd query = spec.effective_query();
  std::vector<ReplicateRecord> records(replicates);

  parallel_for(replicates, jobs, [&](int r) {
    ReplicateRecord& rec = records[r];
    rec.replicate = r;
    rec.child_seed = derive_seed(spec.seed, 0, static_cast<std::uint64_t>(r));
    rec.n = spec.n;
    GeneratorSpec child = spec;
    child.seed = rec.child_seed;
    try {
      auto [data, truth] = generate(child);
      SelectionOutcome outcome = select(data, query, cfg, kernel);
      rec.converged = outcome.solution.converged;
      rec.kkt_residual = outcome.solution.kkt_residual;
      score_selection(outcome.selected, truth.support, rec);
    } catch (const std::exception& e) {
      throw std::runtime_error("replicate " + std::to_string(r) + " (child seed " +
                               std::to_string(rec.child_seed) + "): " + e.what());
    }
  });

  ExperimentSummary summary;
  summary.replicates = std::move(records);
  summary.miss_counts.assign(spec.d, 0);
  summary.false_counts.assign(spec.d, 0);
  int recovered = 0;
  for (const auto& rec : summary.replicates) {
    if (rec.recovered) ++recovered;
    for (int j : truth_support)
      if (!std::binary_search(rec.selected.begin(), rec.selected.end(), j))
        ++summary.miss_counts[j - 1];
    for (int j : rec.selected)
      if (!std::binary_search(truth_support.begin(), truth_support.end(), j))
        ++summary.false_counts[j - 1];
  }
  summary.recovery_rate =
      static_cast<double>(recovered) / summary.replicates.size();
  return summary;
}

ExperimentSummary run_rate_experiment(const GeneratorSpec& spec_template,
                                      const TwoStageConfig& cfg,
                                      const std::vector<Eigen::Index>& n_grid,
                                      int replicates_per_n, int jobs) {
  spec_template.validate();
  if (replicates_per_n < 1)
    throw std::invalid_argument("run_rate_experiment: replicates must be >= 1");
  if (n_grid.size() < 3)
    throw std::invalid_argument("run_rate_experiment: n_grid needs at least 3 sizes");
  for (size_t g = 1; g < n_grid.size(); ++g)
    if (n_grid[g] <= n_grid[g - 1])
      throw std::invalid_argument("run_rate_experiment: n_grid must be strictly increasing");

  const auto truth_support = spec_template.effective_support();
  const Eigen::VectorXd query = spec_template.effective_query();
  const int grid_count = static_cast<int>(n_grid.size());
  const int total = grid_count * replicates_per_n;
  std::vector<ReplicateRecord> records(total);

  parallel_for(total, jobs, [&](int t) {
    const int g = t / replicates_per_n;
    const int r = t % replicates_per_n;
    ReplicateRecord& rec = records[t];
    rec.grid_index = g;
    rec.replicate = r;
    rec.n = n_grid[g];
    rec.child_seed = derive_seed(spec_template.seed,
                                 static_cast<std::uint64_t>(g) + 1,
                                 static_cast<std::uint64_t>(r));
    GeneratorSpec child = spec_template;
    child.n = n_grid[g];
    child.seed = rec.child_seed;
    try {
      auto [data, truth] = generate(child);
      TwoStageResult res = two_stage_estimate(data, query, cfg);
      rec.converged = res.selection.solution.converged;
      rec.kkt_residual = res.selection.solution.kkt_residual;
      score_selection(res.selected, truth.support, rec);
      rec.fhat = res.fhat;
      rec.true_value = truth.value_at_query;
      rec.sq_error = (res.fhat - truth.value_at_query) * (res.fhat - truth.value_at_query);
    } catch (const std::exception& e) {
      throw std::runtime_error("replicate " + std::to_string(r) + " at n=" +
                               std::to_string(n_grid[g]) + " (child seed " +
                               std::to_string(rec.child_seed) + "): " + e.what());
    }
  });

  ExperimentSummary summary;
  summary.replicates = std::move(records);
  summary.grid_n = n_grid;
  summary.grid_mse.assign(grid_count, 0.0);
  summary.grid_recovery.assign(grid_count, 0.0);
  summary.miss_counts.assign(spec_template.d, 0);
  summary.false_counts.assign(spec_template.d, 0);

  double total_sq = 0.0;
  int recovered = 0;
  for (const auto& rec : summary.replicates) {
    summary.grid_mse[rec.grid_index] += rec.sq_error;
    summary.grid_recovery[rec.grid_index] += rec.recovered ? 1.0 : 0.0;
    total_sq += rec.sq_error;
    if (rec.recovered) ++recovered;
    for (int j : truth_support)
      if (!std::binary_search(rec.selected.begin(), rec.selected.end(), j))
        ++summary.miss_counts[j - 1];
    for (int j : rec.selected)
      if (!std::binary_search(truth_support.begin(), truth_support.end(), j))
        ++summary.false_counts[j - 1];
  }
  for (int g = 0; g < grid_count; ++g) {
    summary.grid_mse[g] /= replicates_per_n;
    summary.grid_recovery[g] /= replicates_per_n;
  }
  summary.mse_at_query = total_sq / total;
  summary.recovery_rate = static_cast<double>(recovered) / total;

  std::vector<double> sizes, values;
  for (int g = 0; g < grid_count; ++g) {
    if (summary.grid_mse[g] == 0.0) {
      summary.warnings.push_back("mse exactly 0 at n=" + std::to_string(n_grid[g]) +
                                 "; excluded from the rate fit");
      continue;
    }
    sizes.push_back(static_cast<double>(n_grid[g]));
    values.push_back(summary.grid_mse[g]);
  }
  if (sizes.size() < 3)
    throw std::runtime_error(
        "run_rate_experiment: fewer than 3 grid points with positive mse; "
        "cannot fit a rate");
  double se = 0.0;
  summary.rate_slope = fit_loglog_slope(sizes, values, &se);
  summary.rate_slope_se = se;
  return summary;
}

double fit_loglog_slope(const std::vector<double>& sizes,
                        const std::vector<double>& values,
                        double* standard_error) {
  const size_t m = sizes.size();
  if (m != values.size() || m < 2)
    throw std::invalid_argument("fit_loglog_slope: need two aligned points");
  std::vector<double> lx(m), ly(m);
  for (size_t i = 0; i < m; ++i) {
    if (!(sizes[i] > 0) || !(values[i] > 0))
      throw std::invalid_argument("fit_loglog_slope: sizes and values must be > 0");
    lx[i] = std::log(sizes[i]);
    ly[i] = std::log(values[i]);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / m;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / m;
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < m; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0)
    throw std::invalid_argument("fit_loglog_slope: sizes are all equal");
  const double slope = sxy / sxx;
  if (standard_error) {
    if (m > 2) {
      const double intercept = my - slope * mx;
      double rss = 0.0;
      for (size_t i = 0; i < m; ++i) {
        const double r = ly[i] - intercept - slope * lx[i];
        rss += r * r;
      }
      *standard_error = std::sqrt(rss / (m - 2) / sxx);
    } else {
      *standard_error = 0.0;
    }
  }
  return slope;
}

ComplianceReport compliance_report(const GeneratorSpec& spec,
                                   const SelectionConfig& cfg) {
  ComplianceReport rep;
  const double h = cfg.bandwidth;
  const double n = static_cast<double>(spec.n);
  const double dim_plus_2 = spec.d + 2.0;

  {
    ComplianceCheck chk;
    chk.name = "selection_dimension_regime";
    if (h > 0 && h < 1) {
      const double ratio = std::log(n) / (-std::log(h));
      chk.pass = dim_plus_2 < ratio;
      chk.detail = "d+2 = " + fmt(dim_plus_2) + " vs log(n)/(-log h) = " + fmt(ratio);
    } else {
      chk.pass = false;
      chk.detail = "requires 0 < h < 1; h = " + fmt(h);
    }
    rep.checks.push_back(chk);
  }
  {
    ComplianceCheck chk;
    chk.name = "estimation_dimension_regime";
    if (h > 0 && h < 1) {
      const double ratio = std::log(n) / (-2.0 * std::log(h));
      chk.pass = dim_plus_2 <= ratio;
      chk.detail = "d+2 = " + fmt(dim_plus_2) + " vs log(n)/(-2 log h) = " + fmt(ratio);
    } else {
      chk.pass = false;
      chk.detail = "requires 0 < h < 1; h = " + fmt(h);
    }
    rep.checks.push_back(chk);
  }
  {
    ComplianceCheck chk;
    chk.name = "bandwidth_bound";
    const double bound = bandwidth_bound(cfg.constants);
    chk.pass = h > 0 && h < bound;
    chk.detail = "h = " + fmt(h) + " vs bound = " + fmt(bound);
    rep.checks.push_back(chk);
  }
  {
    ComplianceCheck chk;
    chk.name = "penalty_rule";
    const double expected = penalty_for_bandwidth(cfg.constants, h);
    chk.pass = std::abs(cfg.lambda - expected) <= 1e-9 * std::max(1.0, expected);
    chk.detail = "lambda = " + fmt(cfg.lambda) + " vs rule = " + fmt(expected);
    rep.checks.push_back(chk);
  }
  {
    ComplianceCheck chk;
    chk.name = "separation_floor";
    chk.pass = cfg.constants.separation_compliant();
    chk.detail = "separation = " + fmt(cfg.constants.separation) + " vs floor = " +
                 fmt(cfg.constants.separation_floor());
    rep.checks.push_back(chk);
  }
  {
    ComplianceCheck chk;
    chk.name = "gradient_separation";
    double min_slope = std::numeric_limits<double>::infinity();
    for (double s : spec.slopes) min_slope = std::min(min_slope, std::abs(s));
    if (spec.slopes.empty()) {
      chk.pass = true;
      chk.detail = "no active coordinates";
    } else {
      chk.pass = min_slope >= cfg.constants.separation;
      chk.detail = "min |gradient| = " + fmt(min_slope) + " vs separation = " +
                   fmt(cfg.constants.separation);
    }
    rep.checks.push_back(chk);
  }

  rep.all_pass = std::all_of(rep.checks.begin(), rep.checks.end(),
                             [](const ComplianceCheck& c) { return c.pass; });
  return rep;
}

SelectionConfig resolve_selection_config(const ExperimentConfig& config) {
  const KernelSpec kernel = kernel_by_name(config.selection.kernel, config.generator.d);
  if (kernel.stage != KernelStage::selection)
    throw std::invalid_argument("experiment: selection kernel '" +
                                config.selection.kernel + "' is not selection-stage");
  GeneratorSpec spec = config.generator;
  spec.seed = config.seed;
  const ProblemConstants constants = derive_constants(spec, kernel.envelope_bound);

  SelectionConfig cfg;
  if (config.selection.strict) {
    cfg = choose_parameters(constants, config.selection.h_fraction,
                            config.selection.procedure);
  } else {
    if (!config.selection.bandwidth || !config.selection.lambda)
      throw std::invalid_argument(
          "experiment: explicit bandwidth and lambda are required when strict = false");
    cfg.bandwidth = *config.selection.bandwidth;
    cfg.lambda = *config.selection.lambda;
    cfg.procedure = config.selection.procedure;
    cfg.constants = constants;
    cfg.strict = false;
    cfg.note = "explicit parameters; compliance not enforced";
  }
  cfg.zero_tol = config.selection.zero_tol;
  return cfg;
}

ExperimentRun run_experiment(const ExperimentConfig& config) {
  if (config.kind != "selection" && config.kind != "rate")
    throw std::invalid_argument("experiment: kind must be 'selection' or 'rate'");
  if (config.replicates < 1)
    throw std::invalid_argument("experiment: replicates must be >= 1");

  GeneratorSpec spec = config.generator;
  spec.seed = config.seed;
  const KernelSpec kernel = kernel_by_name(config.selection.kernel, spec.d);

  ExperimentRun run;
  run.selection = resolve_selection_config(config);
  run.compliance = compliance_report(spec, run.selection);

  if (config.kind == "selection") {
    run.summary = run_selection_experiment(spec, run.selection, kernel,
                                           config.replicates, config.jobs);
  } else {
    TwoStageConfig ts;
    ts.selection = run.selection;
    ts.selection_kernel = config.selection.kernel;
    ts.smoothness = config.estimation.smoothness;
    ts.estimation_kernel = config.estimation.kernel;
    ts.bandwidth_override = config.estimation.bandwidth;
    ts.f_max = config.estimation.f_max.value_or(run.selection.constants.f_max);
    run.summary = run_rate_experiment(spec, ts, config.n_grid, config.replicates,
                                      config.jobs);
  }
  return run;
}

}  // namespace locasso
