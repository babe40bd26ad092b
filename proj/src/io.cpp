#include "locasso/io.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "locasso/errors.hpp"

namespace locasso {

namespace {

using nlohmann::json;

constexpr char kBinaryMagic[8] = {'L', 'O', 'C', 'A', 'S', 'S', 'O', '1'};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

bool parse_double(const std::string& s, double& out) {
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r'))
    --end;
  if (begin == end) return false;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

[[noreturn]] void type_error(const std::string& key, const char* expected) {
  throw SchemaError("config key '" + key + "': expected " + expected);
}

const json* find(const json& j, const std::string& key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double require_number(const json& j, const std::string& key) {
  const json* v = find(j, key);
  if (!v || !v->is_number()) type_error(key, "a number");
  return v->get<double>();
}

double number_or(const json& j, const std::string& key, double fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_number()) type_error(key, "a number");
  return v->get<double>();
}

long integer_or(const json& j, const std::string& key, long fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) type_error(key, "an integer");
  return v->get<long>();
}

long require_integer(const json& j, const std::string& key) {
  const json* v = find(j, key);
  if (!v || !v->is_number_integer()) type_error(key, "an integer");
  return v->get<long>();
}

std::string string_or(const json& j, const std::string& key,
                      const std::string& fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_string()) type_error(key, "a string");
  return v->get<std::string>();
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");

  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  int width = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    std::vector<double> values(fields.size());
    bool numeric = true;
    for (size_t c = 0; c < fields.size(); ++c)
      if (!parse_double(fields[c], values[c])) {
        numeric = false;
        break;
      }
    if (!numeric) {
      if (line_no == 1) continue;  // optional header row
      throw std::runtime_error("'" + path.string() + "': malformed row at line " +
                               std::to_string(line_no));
    }
    if (width == -1) width = static_cast<int>(values.size());
    if (static_cast<int>(values.size()) != width)
      throw std::runtime_error("'" + path.string() + "': row at line " +
                               std::to_string(line_no) + " has " +
                               std::to_string(values.size()) + " fields, expected " +
                               std::to_string(width));
    rows.push_back(std::move(values));
  }
  if (rows.empty())
    throw std::runtime_error("'" + path.string() + "': no data rows");
  if (width < 2)
    throw std::runtime_error("'" + path.string() +
                             "': need at least one x column and the y column");

  Dataset data;
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const int d = width - 1;
  data.x.resize(n, d);
  data.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) data.x(i, j) = rows[i][j];
    data.y[i] = rows[i][d];
  }
  data.validate();
  return data;
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data,
                       bool header) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  const int d = data.dim();
  if (header) {
    for (int j = 1; j <= d; ++j) out << "x" << j << ",";
    out << "y\n";
  }
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (int j = 0; j < d; ++j) out << format_double(data.x(i, j)) << ",";
    out << format_double(data.y[i]) << "\n";
  }
}

Dataset read_dataset_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kBinaryMagic, 8) != 0)
    throw std::runtime_error("'" + path.string() + "': not a locasso binary dataset");
  std::uint64_t n = 0, d = 0;
  in.read(reinterpret_cast<char*>(&n), 8);
  in.read(reinterpret_cast<char*>(&d), 8);
  if (!in || n == 0 || d == 0 || n > (1ull << 40) || d > (1ull << 20))
    throw std::runtime_error("'" + path.string() + "': corrupt header");

  Dataset data;
  data.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  data.y.resize(static_cast<Eigen::Index>(n));
  for (std::uint64_t j = 0; j < d; ++j) {
    std::vector<double> col(n);
    in.read(reinterpret_cast<char*>(col.data()), static_cast<std::streamsize>(8 * n));
    if (!in) throw std::runtime_error("'" + path.string() + "': truncated column data");
    for (std::uint64_t i = 0; i < n; ++i)
      data.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
  }
  in.read(reinterpret_cast<char*>(data.y.data()), static_cast<std::streamsize>(8 * n));
  if (!in) throw std::runtime_error("'" + path.string() + "': truncated response data");
  data.validate();
  return data;
}

void write_dataset_binary(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out.write(kBinaryMagic, 8);
  const std::uint64_t n = static_cast<std::uint64_t>(data.size());
  const std::uint64_t d = static_cast<std::uint64_t>(data.dim());
  out.write(reinterpret_cast<const char*>(&n), 8);
  out.write(reinterpret_cast<const char*>(&d), 8);
  std::vector<double> col(n);
  for (std::uint64_t j = 0; j < d; ++j) {
    for (std::uint64_t i = 0; i < n; ++i)
      col[i] = data.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    out.write(reinterpret_cast<const char*>(col.data()),
              static_cast<std::streamsize>(8 * n));
  }
  out.write(reinterpret_cast<const char*>(data.y.data()),
            static_cast<std::streamsize>(8 * n));
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  char magic[8] = {};
  in.read(magic, 8);
  in.close();
  if (std::memcmp(magic, kBinaryMagic, 8) == 0) return read_dataset_binary(path);
  return read_dataset_csv(path);
}

ProblemConstants parse_constants(const json& j) {
  if (!j.is_object()) throw SchemaError("constants: expected an object");
  ProblemConstants c;
  c.holder_const = require_number(j, "holder_const");
  c.smoothness = number_or(j, "smoothness", c.smoothness);
  c.density_min = number_or(j, "density_min", c.density_min);
  c.density_max = number_or(j, "density_max", c.density_max);
  c.density_lipschitz = number_or(j, "density_lipschitz", c.density_lipschitz);
  c.neighborhood_radius = number_or(j, "neighborhood_radius", c.neighborhood_radius);
  c.kernel_bound = number_or(j, "kernel_bound", c.kernel_bound);
  c.separation = number_or(j, "separation", c.separation);
  c.support_bound = static_cast<int>(integer_or(j, "support_bound", c.support_bound));
  c.noise_sd = number_or(j, "noise_sd", c.noise_sd);
  c.f_max = number_or(j, "f_max", c.f_max);
  c.validate();
  return c;
}

json constants_to_json(const ProblemConstants& c) {
  return json{{"holder_const", c.holder_const},
              {"smoothness", c.smoothness},
              {"density_min", c.density_min},
              {"density_max", c.density_max},
              {"density_lipschitz", c.density_lipschitz},
              {"neighborhood_radius", c.neighborhood_radius},
              {"kernel_bound", c.kernel_bound},
              {"separation", c.separation},
              {"support_bound", c.support_bound},
              {"noise_sd", c.noise_sd},
              {"f_max", c.f_max}};
}

namespace {

GeneratorSpec parse_generator(const json& j) {
  if (!j.is_object()) type_error("generator", "an object");
  GeneratorSpec spec;
  spec.n = require_integer(j, "n");
  spec.d = static_cast<int>(require_integer(j, "d"));
  spec.d_star = static_cast<int>(require_integer(j, "d_star"));

  if (const json* design = find(j, "design")) {
    if (!design->is_object()) type_error("design", "an object");
    const std::string type = string_or(*design, "type", "uniform_box");
    if (type != "uniform_box")
      throw SchemaError("config key 'design.type': only 'uniform_box' is supported");
    spec.box_lo = number_or(*design, "lo", spec.box_lo);
    spec.box_hi = number_or(*design, "hi", spec.box_hi);
  }

  const json* fn = find(j, "function");
  if (!fn || !fn->is_object()) type_error("function", "an object");
  const std::string family = string_or(*fn, "family", "affine");
  if (family == "affine")
    spec.family = FunctionFamily::affine;
  else if (family == "polynomial")
    spec.family = FunctionFamily::polynomial;
  else if (family == "smooth")
    spec.family = FunctionFamily::smooth;
  else
    throw SchemaError(
        "config key 'function.family': expected affine, polynomial or smooth");
  spec.intercept = number_or(*fn, "intercept", 0.0);
  if (const json* slopes = find(*fn, "slopes")) {
    if (!slopes->is_array()) type_error("function.slopes", "an array of numbers");
    for (const auto& v : *slopes) {
      if (!v.is_number()) type_error("function.slopes", "an array of numbers");
      spec.slopes.push_back(v.get<double>());
    }
  }
  if (const json* curv = find(*fn, "curvatures")) {
    if (!curv->is_array()) type_error("function.curvatures", "an array of numbers");
    for (const auto& v : *curv) {
      if (!v.is_number()) type_error("function.curvatures", "an array of numbers");
      spec.curvatures.push_back(v.get<double>());
    }
  }
  spec.degree = static_cast<int>(integer_or(*fn, "degree", spec.degree));
  spec.smooth_omega = number_or(*fn, "omega", spec.smooth_omega);

  if (const json* sup = find(j, "support")) {
    if (!sup->is_array()) type_error("support", "an array of integers");
    for (const auto& v : *sup) {
      if (!v.is_number_integer()) type_error("support", "an array of integers");
      spec.support.push_back(v.get<int>());
    }
  }
  spec.noise_sd = number_or(j, "sigma", 0.0);
  if (const json* xq = find(j, "x_query")) {
    if (!xq->is_array()) type_error("x_query", "an array of numbers");
    spec.x_query.resize(static_cast<Eigen::Index>(xq->size()));
    Eigen::Index i = 0;
    for (const auto& v : *xq) {
      if (!v.is_number()) type_error("x_query", "an array of numbers");
      spec.x_query[i++] = v.get<double>();
    }
  }
  spec.smoothness = number_or(j, "smoothness", spec.smoothness);
  spec.holder_const = number_or(j, "holder_const", 0.0);
  spec.f_max = number_or(j, "f_max", 0.0);
  spec.support_bound = static_cast<int>(integer_or(j, "support_bound", 0));
  return spec;
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& j) {
  if (!j.is_object()) throw SchemaError("config: expected a JSON object");
  ExperimentConfig cfg;
  const json* kind = find(j, "kind");
  if (!kind || !kind->is_string()) type_error("kind", "a string ('selection' or 'rate')");
  cfg.kind = kind->get<std::string>();
  if (cfg.kind != "selection" && cfg.kind != "rate")
    throw SchemaError("config key 'kind': expected 'selection' or 'rate'");

  cfg.replicates = static_cast<int>(require_integer(j, "replicates"));
  {
    const json* v = find(j, "seed");
    if (v && !v->is_number_integer()) type_error("seed", "an integer");
    cfg.seed = v ? v->get<std::uint64_t>() : 0;
    cfg.seed_provided = v != nullptr;
  }
  cfg.jobs = static_cast<int>(integer_or(j, "jobs", 1));

  const json* gen = find(j, "generator");
  if (!gen) throw SchemaError("config key 'generator': required object is missing");
  cfg.generator = parse_generator(*gen);

  if (const json* sel = find(j, "selection")) {
    if (!sel->is_object()) type_error("selection", "an object");
    cfg.selection.kernel = string_or(*sel, "kernel", cfg.selection.kernel);
    const std::string proc = string_or(*sel, "procedure", "translated");
    if (proc == "plain")
      cfg.selection.procedure = SelectionProcedure::plain;
    else if (proc == "translated")
      cfg.selection.procedure = SelectionProcedure::translated;
    else
      throw SchemaError("config key 'selection.procedure': expected plain or translated");
    if (const json* strict = find(*sel, "strict")) {
      if (!strict->is_boolean()) type_error("selection.strict", "a boolean");
      cfg.selection.strict = strict->get<bool>();
    }
    cfg.selection.h_fraction = number_or(*sel, "h_fraction", cfg.selection.h_fraction);
    if (const json* h = find(*sel, "h")) {
      if (!h->is_number()) type_error("selection.h", "a number");
      cfg.selection.bandwidth = h->get<double>();
    }
    if (const json* lambda = find(*sel, "lambda")) {
      if (!lambda->is_number()) type_error("selection.lambda", "a number");
      cfg.selection.lambda = lambda->get<double>();
    }
    cfg.selection.zero_tol = number_or(*sel, "zero_tol", cfg.selection.zero_tol);
  }

  cfg.estimation.smoothness = cfg.generator.smoothness;
  if (const json* est = find(j, "estimation")) {
    if (!est->is_object()) type_error("estimation", "an object");
    cfg.estimation.smoothness = number_or(*est, "beta", cfg.estimation.smoothness);
    cfg.estimation.kernel = string_or(*est, "kernel", cfg.estimation.kernel);
    if (const json* b = find(*est, "hstar")) {
      if (!b->is_number()) type_error("estimation.hstar", "a number");
      cfg.estimation.bandwidth = b->get<double>();
    }
    if (const json* fm = find(*est, "f_max")) {
      if (!fm->is_number()) type_error("estimation.f_max", "a number");
      cfg.estimation.f_max = fm->get<double>();
    }
  }

  if (const json* grid = find(j, "n_grid")) {
    if (!grid->is_array()) type_error("n_grid", "an array of integers");
    for (const auto& v : *grid) {
      if (!v.is_number_integer()) type_error("n_grid", "an array of integers");
      cfg.n_grid.push_back(v.get<Eigen::Index>());
    }
  }
  if (cfg.kind == "rate" && cfg.n_grid.empty())
    throw SchemaError("config key 'n_grid': required for kind 'rate'");
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw SchemaError("'" + path.string() + "': invalid JSON: " + e.what());
  }
  return parse_experiment_config(j);
}

json summary_to_json(const ExperimentSummary& s) {
  json j{{"recovery_rate", s.recovery_rate},
         {"mse_at_query", s.mse_at_query},
         {"miss_counts", s.miss_counts},
         {"false_counts", s.false_counts},
         {"replicates", s.replicates.size()},
         {"warnings", s.warnings}};
  if (!s.grid_n.empty()) {
    j["grid_n"] = s.grid_n;
    j["grid_mse"] = s.grid_mse;
    j["grid_recovery"] = s.grid_recovery;
  }
  if (s.rate_slope) j["rate_slope"] = *s.rate_slope;
  if (s.rate_slope_se) j["rate_slope_se"] = *s.rate_slope_se;
  return j;
}

json compliance_to_json(const ComplianceReport& rep) {
  json checks = json::array();
  for (const auto& c : rep.checks)
    checks.push_back(json{{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  return json{{"checks", checks}, {"all_pass", rep.all_pass}};
}

std::string replicates_csv(const ExperimentSummary& s) {
  std::ostringstream out;
  const bool rate = !s.grid_n.empty();
  if (rate)
    out << "grid_index,n,replicate,child_seed,selected,recovered,misses,"
           "false_includes,converged,kkt_residual,fhat,true_value,sq_error\n";
  else
    out << "replicate,child_seed,n,selected,recovered,misses,false_includes,"
           "converged,kkt_residual\n";
  for (const auto& r : s.replicates) {
    std::string sel;
    for (size_t i = 0; i < r.selected.size(); ++i) {
      if (i) sel += '|';
      sel += std::to_string(r.selected[i]);
    }
    if (rate) {
      out << r.grid_index << ',' << r.n << ',' << r.replicate << ',' << r.child_seed
          << ',' << sel << ',' << (r.recovered ? 1 : 0) << ',' << r.misses << ','
          << r.false_includes << ',' << (r.converged ? 1 : 0) << ','
          << format_double(r.kkt_residual) << ',' << format_double(r.fhat) << ','
          << format_double(r.true_value) << ',' << format_double(r.sq_error) << '\n';
    } else {
      out << r.replicate << ',' << r.child_seed << ',' << r.n << ',' << sel << ','
          << (r.recovered ? 1 : 0) << ',' << r.misses << ',' << r.false_includes
          << ',' << (r.converged ? 1 : 0) << ',' << format_double(r.kkt_residual)
          << '\n';
    }
  }
  return out.str();
}

}  // namespace locasso
