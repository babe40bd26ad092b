// locasso command line tool: data ingestion, coordinate selection, two-stage
// estimation, Monte Carlo experiments and kernel validation, with
// machine-readable JSON/CSV outputs. See README.md for the file formats.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include "locasso/errors.hpp"
#include "locasso/io.hpp"
#include "locasso/kernels.hpp"
#include "locasso/lpe.hpp"
#include "locasso/selection.hpp"
#include "locasso/simulation.hpp"
#include "locasso/version.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3 };

LogLevel log_threshold() {
  static LogLevel level = [] {
    const char* env = std::getenv("LOCASSO_LOG");
    if (!env) return LogLevel::warn;
    const std::string v(env);
    if (v == "debug") return LogLevel::debug;
    if (v == "info") return LogLevel::info;
    if (v == "error") return LogLevel::error;
    return LogLevel::warn;
  }();
  return level;
}

void log_line(LogLevel level, const std::string& msg) {
  static const char* names[] = {"debug", "info", "warn", "error"};
  if (level >= log_threshold())
    std::cerr << "locasso [" << names[static_cast<int>(level)] << "] " << msg
              << "\n";
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json make_manifest(const std::string& command, const json& config,
                   std::uint64_t seed, const std::vector<std::string>& outputs) {
  return json{{"tool", "locasso"},
              {"version", locasso::kVersion},
              {"command", command},
              {"seed", seed},
              {"created_utc", utc_timestamp()},
              {"config", config},
              {"outputs", outputs}};
}

Eigen::VectorXd parse_point(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) {
    if (field.empty()) continue;
    size_t used = 0;
    values.push_back(std::stod(field, &used));
    if (used != field.size())
      throw std::invalid_argument("--x: cannot parse '" + field + "'");
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = values[static_cast<size_t>(i)];
  return v;
}

std::vector<int> parse_index_list(const std::string& text) {
  std::vector<int> values;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) {
    if (field.empty()) continue;
    values.push_back(std::stoi(field));
  }
  return values;
}

void emit(const json& payload, const std::string& out_path,
          const std::string& format) {
  std::string text;
  if (format == "csv") {
    std::ostringstream os;
    os << "key,value\n";
    for (auto it = payload.begin(); it != payload.end(); ++it) {
      if (it.key() == "manifest") continue;
      if (it->is_array()) {
        std::string joined;
        for (const auto& v : *it) {
          if (!joined.empty()) joined += '|';
          joined += v.dump();
        }
        os << it.key() << ',' << joined << '\n';
      } else {
        os << it.key() << ',' << it->dump() << '\n';
      }
    }
    text = os.str();
  } else {
    text = payload.dump(2) + "\n";
  }
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
    out << text;
  }
}

struct SelectionFlags {
  std::string kernel = "uniform";
  std::string procedure = "translated";
  bool strict = false;
  std::string constants_file;
  double h_fraction = 0.5;
  std::optional<double> h;
  std::optional<double> lambda;
  double zero_tol = 1e-10;

  void attach(CLI::App* cmd) {
    cmd->add_option("--kernel", kernel, "Selection kernel name")
        ->default_val("uniform");
    cmd->add_option("--procedure", procedure, "plain or translated")
        ->check(CLI::IsMember({"plain", "translated"}))
        ->default_val("translated");
    cmd->add_flag("--strict", strict,
                  "Derive (h, lambda) from the constants file; supplied values "
                  "are validated against the bound");
    cmd->add_option("--constants", constants_file,
                    "JSON file with the problem constants (required with --strict)");
    cmd->add_option("--h-fraction", h_fraction,
                    "Fraction of the bandwidth bound used in strict mode");
    cmd->add_option("--h", h, "Bandwidth");
    cmd->add_option("--lambda", lambda, "Penalty level");
    cmd->add_option("--zero-tol", zero_tol, "Support extraction threshold");
  }

  locasso::SelectionConfig resolve(const locasso::KernelSpec& kernel_spec) const {
    using namespace locasso;
    SelectionProcedure proc = procedure == "plain" ? SelectionProcedure::plain
                                                   : SelectionProcedure::translated;
    SelectionConfig cfg;
    if (strict) {
      if (constants_file.empty())
        throw CLI::ValidationError("--strict requires --constants FILE");
      std::ifstream in(constants_file);
      if (!in)
        throw CLI::ValidationError("cannot open constants file '" + constants_file + "'");
      json j;
      in >> j;
      ProblemConstants constants = parse_constants(j);
      if (constants.kernel_bound < kernel_spec.envelope_bound) {
        log_line(LogLevel::warn,
                 "constants kernel_bound below the kernel's validated bound; "
                 "using " + std::to_string(kernel_spec.envelope_bound));
        constants.kernel_bound = kernel_spec.envelope_bound;
      }
      if (h) {
        const double bound = bandwidth_bound(constants);
        if (!(*h > 0) || !(*h < bound))
          throw CLI::ValidationError(
              "--h " + std::to_string(*h) +
              " violates the strict bandwidth bound: need 0 < h < " +
              std::to_string(bound) +
              " (= min(density_min/(32 (d0+1) density_lipschitz kernel_bound), "
              "neighborhood_radius))");
        cfg.bandwidth = *h;
        cfg.lambda = penalty_for_bandwidth(constants, *h);
        if (lambda && std::abs(*lambda - cfg.lambda) > 1e-9 * std::max(1.0, cfg.lambda))
          throw CLI::ValidationError(
              "--lambda " + std::to_string(*lambda) +
              " does not match the strict rule 8 sqrt(3 kernel_bound "
              "density_max) holder_const h = " + std::to_string(cfg.lambda));
        cfg.constants = constants;
        cfg.strict = true;
        cfg.procedure = proc;
      } else {
        cfg = choose_parameters(constants, h_fraction, proc);
      }
    } else {
      if (!h || !lambda)
        throw CLI::ValidationError("--h and --lambda are required without --strict");
      cfg.bandwidth = *h;
      cfg.lambda = *lambda;
      cfg.procedure = proc;
      cfg.strict = false;
      cfg.note = "explicit parameters; compliance not enforced";
    }
    cfg.zero_tol = zero_tol;
    return cfg;
  }

  json snapshot() const {
    json j{{"kernel", kernel},   {"procedure", procedure},
           {"strict", strict},   {"h_fraction", h_fraction},
           {"zero_tol", zero_tol}};
    if (!constants_file.empty()) j["constants_file"] = constants_file;
    if (h) j["h"] = *h;
    if (lambda) j["lambda"] = *lambda;
    return j;
  }
};

int cmd_select(const std::string& data_path, const std::string& x_text,
               const SelectionFlags& flags, const std::string& out_path,
               const std::string& format, const std::string& trace_path) {
  using namespace locasso;
  Dataset data = read_dataset(data_path);
  Eigen::VectorXd query = parse_point(x_text);
  if (query.size() != data.dim())
    throw CLI::ValidationError("--x has " + std::to_string(query.size()) +
                               " coordinates, data has " +
                               std::to_string(data.dim()));
  KernelSpec kernel = kernel_by_name(flags.kernel, data.dim());
  if (kernel.stage != KernelStage::selection)
    throw CLI::ValidationError("kernel '" + flags.kernel + "' is not selection-stage");
  SelectionConfig cfg = flags.resolve(kernel);
  if (!trace_path.empty()) cfg.solver.trace = true;

  SelectionOutcome outcome = select(data, query, cfg, kernel);

  if (!trace_path.empty()) {
    std::ofstream trace(trace_path);
    trace << "sweep,objective,kkt_residual\n";
    for (size_t s = 0; s < outcome.solution.trace.size(); ++s)
      trace << s + 1 << ',' << format_double(outcome.solution.trace[s].objective)
            << ',' << format_double(outcome.solution.trace[s].kkt_residual) << '\n';
  }

  json config = flags.snapshot();
  config["data"] = data_path;
  config["x"] = x_text;
  json result{{"selected", outcome.selected},
              {"theta", std::vector<double>(outcome.theta.data(),
                                            outcome.theta.data() + outcome.theta.size())},
              {"kkt_residual", outcome.solution.kkt_residual},
              {"converged", outcome.solution.converged},
              {"compliant", outcome.config.strict},
              {"h", outcome.config.bandwidth},
              {"lambda", outcome.config.lambda},
              {"manifest", make_manifest("select", config, 0,
                                         out_path.empty() ? std::vector<std::string>{}
                                                          : std::vector<std::string>{out_path})}};
  emit(result, out_path, format);
  return outcome.solution.converged ? 0 : 2;
}

int cmd_estimate(const std::string& data_path, const std::string& x_text,
                 double beta, double f_max, const std::string& kernel_star,
                 std::optional<double> hstar,
                 const std::optional<std::string>& selected_text,
                 bool auto_select, const SelectionFlags& flags,
                 const std::string& out_path, const std::string& format) {
  using namespace locasso;
  Dataset data = read_dataset(data_path);
  Eigen::VectorXd query = parse_point(x_text);
  if (query.size() != data.dim())
    throw CLI::ValidationError("--x has " + std::to_string(query.size()) +
                               " coordinates, data has " +
                               std::to_string(data.dim()));

  json config{{"data", data_path}, {"x", x_text},       {"beta", beta},
              {"fmax", f_max},     {"kernel_star", kernel_star}};

  std::vector<int> selected;
  bool converged = true;
  if (auto_select) {
    KernelSpec kernel = kernel_by_name(flags.kernel, data.dim());
    SelectionConfig cfg = flags.resolve(kernel);
    cfg.procedure = SelectionProcedure::translated;
    SelectionOutcome outcome = select_translated(data, query, cfg, kernel);
    selected = outcome.selected;
    converged = outcome.solution.converged;
    config["selection"] = flags.snapshot();
  } else if (selected_text) {
    selected = parse_index_list(*selected_text);
    config["selected"] = selected;
  } else {
    throw CLI::ValidationError("either --selected or --auto-select is required");
  }

  LpeConfig lpe;
  lpe.smoothness = beta;
  lpe.selected = selected;
  lpe.bandwidth = hstar;
  lpe.kernel = kernel_star;
  lpe.f_max = f_max;
  PolyFit fit = fit_local_polynomial(data, query, lpe);
  if (!fit.note.empty()) log_line(LogLevel::warn, fit.note);
  const double fhat = clamp_estimate(fit, f_max);

  json result{{"fhat", fhat},
              {"selected", selected},
              {"unique", fit.unique},
              {"hstar", fit.bandwidth},
              {"manifest", make_manifest("estimate", config, 0,
                                         out_path.empty() ? std::vector<std::string>{}
                                                          : std::vector<std::string>{out_path})}};
  emit(result, out_path, format);
  return converged ? 0 : 2;
}

int cmd_experiment(const std::string& config_path, const std::string& out_dir,
                   std::optional<std::uint64_t> seed_flag,
                   std::optional<int> jobs_flag) {
  using namespace locasso;
  ExperimentConfig config = load_experiment_config(config_path);
  if (seed_flag) {
    config.seed = *seed_flag;
    config.seed_provided = true;
  }
  if (!config.seed_provided) {
    std::random_device rd;
    config.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    log_line(LogLevel::warn,
             "no seed given; using random seed " + std::to_string(config.seed));
  }
  if (jobs_flag) config.jobs = *jobs_flag;
  if (config.jobs <= 0)
    config.jobs = static_cast<int>(std::thread::hardware_concurrency());

  fs::create_directories(out_dir);
  const fs::path manifest_path = fs::path(out_dir) / "manifest.json";
  const fs::path csv_path = fs::path(out_dir) / "results.csv";
  const fs::path summary_path = fs::path(out_dir) / "summary.json";

  // The manifest goes to disk before any computation starts.
  json config_echo;
  {
    std::ifstream in(config_path);
    in >> config_echo;
  }
  {
    std::ofstream out(manifest_path);
    out << make_manifest("experiment", config_echo, config.seed,
                         {"results.csv", "summary.json"})
               .dump(2)
        << "\n";
  }

  log_line(LogLevel::info, "running " + config.kind + " experiment with " +
                               std::to_string(config.replicates) +
                               " replicates (jobs=" + std::to_string(config.jobs) +
                               ", seed=" + std::to_string(config.seed) + ")");
  ExperimentRun run = run_experiment(config);

  {
    std::ofstream out(csv_path);
    out << replicates_csv(run.summary);
  }
  json summary = summary_to_json(run.summary);
  summary["compliance"] = compliance_to_json(run.compliance);
  summary["seed"] = config.seed;
  summary["kind"] = config.kind;
  summary["h"] = run.selection.bandwidth;
  summary["lambda"] = run.selection.lambda;
  summary["manifest"] = "manifest.json";
  {
    std::ofstream out(summary_path);
    out << summary.dump(2) << "\n";
  }
  std::cout << summary.dump(2) << "\n";
  for (const auto& w : run.summary.warnings) log_line(LogLevel::warn, w);
  return 0;
}

int cmd_validate_kernel(const std::string& name, int dim, double beta,
                        std::optional<double> tol, const std::string& out_path,
                        const std::string& format) {
  using namespace locasso;
  KernelSpec kernel = kernel_by_name(name, dim);
  json result;
  bool pass = false;
  if (kernel.stage == KernelStage::selection) {
    auto rep = validate_selection_kernel(kernel, tol.value_or(1e-8));
    pass = rep.pass;
    std::vector<double> diag(rep.moments.rows());
    for (Eigen::Index i = 0; i < rep.moments.rows(); ++i) diag[i] = rep.moments(i, i);
    result = json{{"kernel", name},
                  {"dimension", dim},
                  {"stage", "selection"},
                  {"pass", rep.pass},
                  {"symmetric", rep.symmetric},
                  {"supported", rep.supported},
                  {"moments_diagonal", rep.moments_diagonal},
                  {"moment_diagonal", diag},
                  {"envelope_quantities", rep.envelope_quantities},
                  {"envelope_bound", kernel.envelope_bound},
                  {"envelope_ok", rep.envelope_ok},
                  {"message", rep.message}};
  } else {
    auto rep = validate_estimation_kernel(kernel, beta, tol.value_or(1e-6));
    pass = rep.pass;
    result = json{{"kernel", name},       {"dimension", dim},
                  {"stage", "estimation"}, {"pass", rep.pass},
                  {"cap", rep.cap},        {"mass", rep.mass},
                  {"weighted_square", rep.weighted_square},
                  {"weighted_sup", rep.weighted_sup},
                  {"tail_bound", rep.tail_bound},
                  {"message", rep.message}};
  }
  result["manifest"] = make_manifest("validate-kernel",
                                     json{{"kernel", name}, {"dim", dim}, {"beta", beta}},
                                     0, {});
  emit(result, out_path, format);
  return pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pointwise coordinate selection and local polynomial estimation "
               "for high-dimensional regression"};
  app.require_subcommand(1);
  app.set_version_flag("--version", locasso::kVersion);
  // The short help alias would collide with the --h bandwidth flag.
  app.set_help_flag("--help", "Print help");

  std::string data_path, x_text, out_path, format = "json", trace_path;
  SelectionFlags sel_flags;

  auto* select_cmd = app.add_subcommand("select", "Select the relevant coordinates");
  select_cmd->set_help_flag("--help", "Print help");
  select_cmd->add_option("--data", data_path, "Dataset file (CSV or binary)")->required();
  select_cmd->add_option("--x", x_text, "Query point, comma separated")->required();
  sel_flags.attach(select_cmd);
  select_cmd->add_option("--out", out_path, "Write the JSON result here instead of stdout");
  select_cmd->add_option("--format", format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  select_cmd->add_option("--debug-trace", trace_path,
                         "Dump per-sweep objective and optimality residual as CSV");

  double beta = 2.0, f_max = 1.0;
  std::string kernel_star = "gaussian_trunc";
  std::optional<double> hstar;
  std::optional<std::string> selected_text;
  bool auto_select = false;
  auto* estimate_cmd = app.add_subcommand("estimate", "Estimate f at the query point");
  estimate_cmd->set_help_flag("--help", "Print help");
  estimate_cmd->add_option("--data", data_path, "Dataset file (CSV or binary)")->required();
  estimate_cmd->add_option("--x", x_text, "Query point, comma separated")->required();
  estimate_cmd->add_option("--beta", beta, "Smoothness exponent (> 1)")->default_val(2.0);
  estimate_cmd->add_option("--fmax", f_max, "Known bound on |f(x)|")->required();
  estimate_cmd->add_option("--kernel-star", kernel_star, "Estimation kernel name")
      ->default_val("gaussian_trunc");
  estimate_cmd->add_option("--hstar", hstar,
                           "Second-stage bandwidth (default n^(-1/(2 beta + k)))");
  estimate_cmd->add_option("--selected", selected_text,
                           "Comma-separated 1-based coordinates; empty string fits "
                           "the kernel-weighted mean");
  estimate_cmd->add_flag("--auto-select", auto_select,
                         "Run the translated selector first");
  sel_flags.attach(estimate_cmd);
  estimate_cmd->add_option("--out", out_path, "Write the JSON result here");
  estimate_cmd->add_option("--format", format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));

  std::string config_path, exp_out = "locasso_out";
  std::optional<std::uint64_t> seed_flag;
  std::optional<int> jobs_flag;
  auto* experiment_cmd =
      app.add_subcommand("experiment", "Run a seeded Monte Carlo experiment");
  experiment_cmd->set_help_flag("--help", "Print help");
  experiment_cmd->add_option("--config", config_path, "Experiment JSON config")->required();
  experiment_cmd->add_option("--out", exp_out, "Output directory")->capture_default_str();
  experiment_cmd->add_option("--seed", seed_flag, "Master seed (overrides the config)");
  experiment_cmd->add_option("--jobs", jobs_flag,
                             "Worker threads (0 = logical cores)");

  std::string vk_name;
  int vk_dim = 1;
  double vk_beta = 2.0;
  std::optional<double> vk_tol;
  auto* validate_cmd =
      app.add_subcommand("validate-kernel", "Check a kernel's required properties");
  validate_cmd->set_help_flag("--help", "Print help");
  validate_cmd->add_option("--kernel", vk_name, "Kernel name")->required();
  validate_cmd->add_option("--dim", vk_dim, "Dimension")->required();
  validate_cmd->add_option("--beta", vk_beta, "Smoothness for the estimation checks")
      ->default_val(2.0);
  validate_cmd->add_option("--tol", vk_tol, "Validation tolerance");
  validate_cmd->add_option("--out", out_path, "Write the JSON report here");
  validate_cmd->add_option("--format", format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (select_cmd->parsed())
      return cmd_select(data_path, x_text, sel_flags, out_path, format, trace_path);
    if (estimate_cmd->parsed())
      return cmd_estimate(data_path, x_text, beta, f_max, kernel_star, hstar,
                          selected_text, auto_select, sel_flags, out_path, format);
    if (experiment_cmd->parsed())
      return cmd_experiment(config_path, exp_out, seed_flag, jobs_flag);
    if (validate_cmd->parsed())
      return cmd_validate_kernel(vk_name, vk_dim, vk_beta, vk_tol, out_path, format);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "locasso: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "locasso: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
