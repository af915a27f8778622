#pragma once

#include "stackgame/problems.hpp"
#include "stackgame/random.hpp"

#include <fstream>

namespace stackgame {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Builder selection plus overrides. When any builder field is set the problem
/// is constructed from its family ("quadratic"/"sq2"/"coupled*" or "cournot*")
/// instead of looked up verbatim in the catalog. mu_g_scale rescales the
/// declared monotonicity constant only (negative-control knob); the instance
/// itself is untouched.
struct ProblemConfig {
  std::string name = "sq2";
  std::optional<int> k;
  std::optional<double> coupling;
  std::optional<Vec> shift;
  std::optional<double> a, b, tax_weight;
  std::optional<Vec> costs, y_target;
  double mu_g_scale = 1.0;

  bool has_builder_override() const {
    return k || coupling || shift || a || b || tax_weight || costs || y_target;
  }
};

struct InitConfig {
  std::optional<Vec> x0, y0, z0;
  unsigned long seed = 0;  // nonzero: sample missing starts inside the boxes
};

struct OutputConfig {
  std::string trace_path;    // empty: no trace file
  std::string summary_path;  // empty: summary to stdout only
};

struct RunConfig {
  ProblemConfig problem;
  ScheduleParams schedule;
  InitConfig init;
  OutputConfig output;
  bool oracle_checks = true;  // use the exact oracle when the instance has one
};

namespace detail {

inline std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t");
  size_t e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

inline double config_double(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value '" + v + "' for key '" + key + "'");
  }
}

inline long config_long(const std::string& v, const std::string& key) {
  const double d = config_double(v, key);
  if (d != std::floor(d)) throw ConfigError("key '" + key + "' needs an integer, got '" + v + "'");
  return static_cast<long>(d);
}

inline bool config_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("bad boolean value '" + v + "' for key '" + key + "'");
}

inline Vec config_vec(const std::string& v, const std::string& key) {
  std::vector<double> vals;
  std::string cur;
  std::istringstream ss(v);
  while (std::getline(ss, cur, ',')) vals.push_back(config_double(trim(cur), key));
  if (vals.empty()) throw ConfigError("empty vector for key '" + key + "'");
  return Eigen::Map<const Vec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

}  // namespace detail

/// Routes one dotted key ("section.key") into the config. Every key the file
/// format accepts goes through here, so command-line overrides and the file
/// parser cannot drift apart. Unknown keys are errors.
inline void apply_config_entry(RunConfig& cfg, const std::string& dotted,
                               const std::string& value) {
  using namespace detail;
  const size_t dot = dotted.find('.');
  if (dot == std::string::npos)
    throw ConfigError("key '" + dotted + "' must be section-qualified (section.key)");
  const std::string section = dotted.substr(0, dot);
  const std::string key = dotted.substr(dot + 1);

  if (section == "problem") {
    if (key == "name") cfg.problem.name = value;
    else if (key == "k") cfg.problem.k = static_cast<int>(config_long(value, dotted));
    else if (key == "coupling") cfg.problem.coupling = config_double(value, dotted);
    else if (key == "shift") cfg.problem.shift = config_vec(value, dotted);
    else if (key == "a") cfg.problem.a = config_double(value, dotted);
    else if (key == "b") cfg.problem.b = config_double(value, dotted);
    else if (key == "tax_weight") cfg.problem.tax_weight = config_double(value, dotted);
    else if (key == "costs") cfg.problem.costs = config_vec(value, dotted);
    else if (key == "y_target") cfg.problem.y_target = config_vec(value, dotted);
    else if (key == "mu_g_scale") cfg.problem.mu_g_scale = config_double(value, dotted);
    else throw ConfigError("unknown key '" + dotted + "'");
  } else if (section == "schedule") {
    ScheduleParams& s = cfg.schedule;
    if (key == "rho") s.rho = config_double(value, dotted);
    else if (key == "eps_prime") s.eps_prime = config_double(value, dotted);
    else if (key == "eta") s.eta = config_double(value, dotted);
    else if (key == "lambda_cap") s.lambda_cap = config_double(value, dotted);
    else if (key == "t_max") s.t_max = config_long(value, dotted);
    else if (key == "target_eps") s.target_eps = config_double(value, dotted);
    else if (key == "c_y") s.c_y = config_double(value, dotted);
    else if (key == "c_z") s.c_z = config_double(value, dotted);
    else if (key == "big_c_z") s.big_c_z = config_double(value, dotted);
    else if (key == "z_dist0") s.z_dist0 = config_double(value, dotted);
    else if (key == "y_tol_scale") s.y_tol_scale = config_double(value, dotted);
    else if (key == "z_tol_scale") s.z_tol_scale = config_double(value, dotted);
    else if (key == "stationarity_inner_tol") s.stationarity_inner_tol = config_double(value, dotted);
    else throw ConfigError("unknown key '" + dotted + "'");
  } else if (section == "init") {
    if (key == "x0") cfg.init.x0 = config_vec(value, dotted);
    else if (key == "y0") cfg.init.y0 = config_vec(value, dotted);
    else if (key == "z0") cfg.init.z0 = config_vec(value, dotted);
    else if (key == "seed") cfg.init.seed = static_cast<unsigned long>(config_long(value, dotted));
    else throw ConfigError("unknown key '" + dotted + "'");
  } else if (section == "output") {
    if (key == "trace") cfg.output.trace_path = value;
    else if (key == "summary") cfg.output.summary_path = value;
    else throw ConfigError("unknown key '" + dotted + "'");
  } else if (section == "checks") {
    if (key == "oracle") cfg.oracle_checks = config_bool(value, dotted);
    else throw ConfigError("unknown key '" + dotted + "'");
  } else {
    throw ConfigError("unknown section '" + section + "'");
  }
}

/// INI-style file: [section] headers, key = value lines, '#' or ';' comments.
inline RunConfig parse_config(std::istream& is, RunConfig cfg = {}) {
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const size_t comment = line.find_first_of("#;");
    if (comment != std::string::npos) line.erase(comment);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (section.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": key '" + key +
                        "' outside any [section]");
    apply_config_entry(cfg, section + "." + key, value);
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path, RunConfig cfg = {}) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  return parse_config(f, std::move(cfg));
}

/// Materializes the configured instance. Family overrides rebuild from the
/// matching builder; otherwise the name is a catalog lookup.
inline ProblemCatalogEntry build_entry(const RunConfig& cfg) {
  const ProblemConfig& pc = cfg.problem;
  ProblemCatalogEntry e;
  if (pc.has_builder_override()) {
    const bool cournot = pc.name.rfind("cournot", 0) == 0;
    if (cournot) {
      e = make_cournot(pc.k.value_or(2), pc.a.value_or(10.0), pc.b.value_or(1.0),
                       pc.tax_weight.value_or(2.5), pc.costs, pc.y_target);
    } else {
      const int k = pc.k.value_or(2);
      e = make_symmetric_quadratic(k, pc.coupling.value_or(0.0),
                                   pc.shift ? *pc.shift : Vec::Zero(1));
      e.name = pc.name;
    }
  } else {
    e = find_problem(pc.name);
  }
  if (pc.mu_g_scale != 1.0) {
    if (pc.mu_g_scale <= 0.0) throw ConfigError("problem.mu_g_scale must be positive");
    e.problem.constants.mu_g *= pc.mu_g_scale;
  }
  return e;
}

/// Schedule with start points resolved: explicit vectors win, then (for
/// nonzero seed) box-uniform samples, then solver defaults.
inline ScheduleParams resolve_schedule(const RunConfig& cfg, const StackelbergProblem& p) {
  ScheduleParams s = cfg.schedule;
  s.x0 = cfg.init.x0;
  s.y0 = cfg.init.y0;
  s.z0 = cfg.init.z0;
  if (cfg.init.seed != 0) {
    Rng rng(cfg.init.seed);
    if (!s.x0) s.x0 = rng.sample(p.leader_dim, p.leader_box, p.working_radius);
    if (!s.y0) s.y0 = rng.sample(p.layout.total(), p.follower_box, p.working_radius);
    if (!s.z0) s.z0 = s.y0;
  }
  return s;
}

}  // namespace stackgame
