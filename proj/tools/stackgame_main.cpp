// Command-line front end: solve (trace emission), verify (bound suites over a
// fresh trace), gradcheck (finite-difference consistency), ratefit (empirical
// rate exponents from traces).
//
// Exit codes: 0 success, 1 usage/config error, 2 budget exhausted,
// 3 verification failure.

#include "stackgame/stackgame.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <iostream>

namespace {

using nlohmann::json;
using namespace stackgame;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitBudget = 2;
constexpr int kExitVerification = 3;

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void apply_overrides(RunConfig& cfg, const std::vector<std::string>& extras) {
  for (const std::string& tok : extras) {
    const size_t eq = tok.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("expected section.key=value override, got '" + tok + "'");
    apply_config_entry(cfg, tok.substr(0, eq), tok.substr(eq + 1));
  }
}

void emit(const json& j, const std::string& path) {
  if (!path.empty()) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open output file: " + path);
    f << j.dump(2) << "\n";
  }
  std::cout << j.dump(2) << "\n";
}

// Grid of leader points for the lemma suites: axis linspace for 1-d leaders,
// seeded box samples otherwise.
std::vector<Vec> leader_grid(const StackelbergProblem& p, int count) {
  std::vector<Vec> xs;
  const double lo = p.leader_box ? p.leader_box->lower[0] : -p.working_radius;
  const double hi = p.leader_box ? p.leader_box->upper[0] : p.working_radius;
  if (p.leader_dim == 1) {
    for (int i = 0; i < count; ++i)
      xs.push_back(Vec::Constant(1, lo + (hi - lo) * i / double(count - 1)));
  } else {
    Rng rng(42);
    for (int i = 0; i < count; ++i)
      xs.push_back(rng.sample(p.leader_dim, p.leader_box, p.working_radius));
  }
  return xs;
}

// Dyadic penalty grid 2, 4, ..., 1024, clipped to the strong-convexity
// threshold; falls back to threshold multiples when the threshold is beyond
// the grid.
std::vector<double> penalty_grid(const SmoothnessConstants& c) {
  const double thr = lambda_threshold(c);
  std::vector<double> lambdas;
  for (double lam = 2.0; lam <= 1024.0; lam *= 2.0)
    if (lam >= thr - 1e-12) lambdas.push_back(lam);
  if (lambdas.empty())
    for (double lam = thr; lam <= 1024.0 * thr; lam *= 4.0) lambdas.push_back(lam);
  return lambdas;
}

struct SolveArtifacts {
  ProblemCatalogEntry entry;
  SolveOutcome outcome;
  double wall_seconds = 0.0;
  std::optional<QuadraticOracle> oracle;
  CertificationHooks hooks;
};

SolveArtifacts run_from_config(const RunConfig& cfg) {
  SolveArtifacts art;
  art.entry = build_entry(cfg);
  const ScheduleParams sched = resolve_schedule(cfg, art.entry.problem);
  const CertificationHooks* hooks = nullptr;
  if (cfg.oracle_checks && art.entry.spec) {
    art.oracle.emplace(*art.entry.spec);
    art.hooks = art.oracle->make_certification_hooks();
    hooks = &art.hooks;
  }
  const auto t0 = std::chrono::steady_clock::now();
  art.outcome = run(art.entry.problem, sched, hooks);
  art.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return art;
}

json summary_json(const SolveArtifacts& art, const RunConfig& cfg) {
  const SolveOutcome& out = art.outcome;
  json j;
  j["problem"] = art.entry.name;
  j["status"] = to_string(out.status);
  j["iterations"] = out.trace.size();
  j["best_grad_norm"] = out.best_grad_norm;
  j["best_grad_is_true"] = out.best_grad_is_true;
  j["best_t"] = out.best_t;
  j["total_grad_evals"] = out.total_grad_evals;
  j["wall_time_s"] = art.wall_seconds;
  j["eta"] = out.eta;
  j["alpha"] = out.alpha;
  j["target_eps"] = cfg.schedule.target_eps;
  if (!out.trace.empty()) {
    j["final_lambda"] = out.trace.back().lambda;
    j["final_follower_gap_max"] = out.final_certificate.max_follower_gap;
    j["final_grad_norm"] = out.final_certificate.grad_norm;
  }
  if (out.status == SolveStatus::kNumericFailure) j["failure"] = out.failure_message;
  return j;
}

int cmd_solve(const RunConfig& cfg) {
  const SolveArtifacts art = run_from_config(cfg);
  if (!cfg.output.trace_path.empty()) {
    TraceMeta meta{art.entry.name, art.outcome.alpha, cfg.schedule.rho, cfg.schedule.eps_prime,
                   art.outcome.eta, utc_timestamp()};
    write_trace_file(cfg.output.trace_path, art.outcome.trace, meta);
  }
  emit(summary_json(art, cfg), cfg.output.summary_path);
  switch (art.outcome.status) {
    case SolveStatus::kConverged: return kExitOk;
    case SolveStatus::kBudgetExhausted: return kExitBudget;
    case SolveStatus::kNumericFailure: return kExitUsage;
  }
  return kExitUsage;
}

// The default solve start (box center) is the exact optimum of the symmetric
// built-ins, which would make the fresh trace trivial; verify starts off
// center instead unless the config pins a start.
Vec off_center_start(const StackelbergProblem& p) {
  if (p.leader_box) return p.leader_box->lower + 0.9 * (p.leader_box->upper - p.leader_box->lower);
  return Vec::Constant(p.leader_dim, 0.9 * p.working_radius);
}

int cmd_verify(RunConfig cfg) {
  if (!cfg.init.x0 && cfg.init.seed == 0) cfg.init.x0 = off_center_start(build_entry(cfg).problem);
  const SolveArtifacts art = run_from_config(cfg);
  if (!art.oracle) {
    std::cerr << "error: oracle unavailable for problem '" << art.entry.name << "'\n";
    return kExitUsage;
  }
  const StackelbergProblem& p = art.entry.problem;
  const SmoothnessConstants& c = p.constants;

  json checks = json::array();
  bool all_pass = true;
  auto push_ratio = [&](const LemmaCheck& lc) {
    checks.push_back({{"name", lc.name}, {"worst_ratio", lc.worst_ratio}, {"pass", lc.pass}});
    all_pass = all_pass && lc.pass;
  };
  auto push_check = [&](const CheckReport& r) {
    checks.push_back({{"name", r.name},
                      {"max_violation", r.max_violation},
                      {"checked", r.checked},
                      {"pass", r.pass}});
    all_pass = all_pass && r.pass;
  };

  for (const LemmaCheck& lc :
       art.oracle->verify_lemma_bounds(c, leader_grid(p, 11), penalty_grid(c)))
    push_ratio(lc);
  push_check(descent_check(art.outcome.trace, art.hooks, implicit_gradient_smoothness(c)));
  push_check(error_decomposition_check(art.outcome.trace));
  push_check(leader_step_check(art.outcome.trace, p.num_followers(), c));
  push_check(inner_consistency_check(art.outcome.trace, c.mu_g));

  json j;
  j["problem"] = art.entry.name;
  j["trace_iterations"] = art.outcome.trace.size();
  j["solve_status"] = to_string(art.outcome.status);
  j["checks"] = checks;
  j["pass"] = all_pass;
  emit(j, cfg.output.summary_path);
  return all_pass ? kExitOk : kExitVerification;
}

struct FdSuiteResult {
  std::string name;
  double worst_rel = 0.0;
};

double rel_err(const Vec& approx, const Vec& exact) {
  return (approx - exact).norm() / std::max(1.0, exact.norm());
}

// Finite-difference consistency of every gradient oracle the solver touches,
// plus the exact oracle's hypergradient when available.
std::vector<FdSuiteResult> gradcheck_suites(const ProblemCatalogEntry& entry,
                                            std::uint64_t seed) {
  const StackelbergProblem& p = entry.problem;
  const int k = p.num_followers();
  Rng rng(seed ? seed : 7);
  const double thr = lambda_threshold(p.constants);
  FdSuiteResult leader{"leader_gradients", 0.0};
  FdSuiteResult followers{"follower_gradients", 0.0};
  FdSuiteResult surrogate{"surrogate_gradients", 0.0};
  for (int trial = 0; trial < 50; ++trial) {
    const Vec x = rng.sample(p.leader_dim, p.leader_box, p.working_radius);
    const Vec y = rng.sample(p.layout.total(), p.follower_box, p.working_radius);
    const Vec z = rng.sample(p.layout.total(), p.follower_box, p.working_radius);
    const double lam = thr + 3.0 * rng.unit();

    leader.worst_rel = std::max(
        leader.worst_rel,
        rel_err(fd_gradient([&](const Vec& xx) { return p.leader.value(xx, y); }, x),
                p.leader.grad_x(x, y)));
    leader.worst_rel = std::max(
        leader.worst_rel,
        rel_err(fd_gradient([&](const Vec& yy) { return p.leader.value(x, yy); }, y),
                p.leader.grad_y(x, y)));
    for (int i = 0; i < k; ++i) {
      followers.worst_rel = std::max(
          followers.worst_rel,
          rel_err(fd_gradient([&](const Vec& xx) { return p.followers[i].value(xx, y); }, x),
                  p.followers[i].grad_x(x, y)));
      Vec own_fd = fd_gradient(
          [&](const Vec& own) {
            Vec yy = y;
            yy.segment(p.layout.offset(i), p.layout.size(i)) = own;
            return p.followers[i].value(x, yy);
          },
          y.segment(p.layout.offset(i), p.layout.size(i)));
      followers.worst_rel =
          std::max(followers.worst_rel, rel_err(own_fd, p.followers[i].grad_own(x, y)));
    }
    surrogate.worst_rel = std::max(
        surrogate.worst_rel,
        rel_err(fd_gradient([&](const Vec& xx) { return surrogate_value(p, lam, xx, y, z); }, x),
                surrogate_grad_x(p, lam, x, y, z)));
    surrogate.worst_rel = std::max(
        surrogate.worst_rel,
        rel_err(fd_gradient([&](const Vec& yy) { return surrogate_value(p, lam, x, yy, z); }, y),
                surrogate_grad_y(p, lam, x, y, z)));
  }
  std::vector<FdSuiteResult> out{leader, followers, surrogate};
  if (entry.spec) {
    const QuadraticOracle oracle(*entry.spec);
    FdSuiteResult hyper{"oracle_hypergradient", 0.0};
    for (int trial = 0; trial < 20; ++trial) {
      const Vec x = rng.sample(p.leader_dim, p.leader_box, p.working_radius);
      hyper.worst_rel = std::max(
          hyper.worst_rel,
          rel_err(fd_gradient([&](const Vec& xx) { return oracle.leader_value(xx); }, x),
                  oracle.true_gradient(x)));
    }
    out.push_back(hyper);
  }
  return out;
}

int cmd_gradcheck(const RunConfig& cfg) {
  const ProblemCatalogEntry entry = build_entry(cfg);
  json suites = json::array();
  bool pass = true;
  for (const FdSuiteResult& s : gradcheck_suites(entry, cfg.init.seed)) {
    const bool ok = s.worst_rel <= 1e-5;
    suites.push_back({{"name", s.name}, {"worst_rel_error", s.worst_rel}, {"pass", ok}});
    pass = pass && ok;
  }
  json j;
  j["problem"] = entry.name;
  j["suites"] = suites;
  j["pass"] = pass;
  emit(j, cfg.output.summary_path);
  return pass ? kExitOk : kExitVerification;
}

int cmd_ratefit(const std::vector<std::string>& files, const std::string& out_path) {
  json results = json::array();
  bool pass = true;
  for (const std::string& file : files) {
    const ParsedTrace t = parse_trace_file(file);
    const RateFit fit = fit_rate(t.records, t.meta.alpha);
    results.push_back({{"file", file},
                       {"problem", t.meta.problem},
                       {"alpha", t.meta.alpha},
                       {"slope", fit.slope},
                       {"intercept", fit.intercept},
                       {"r2", fit.r2},
                       {"points", fit.points},
                       {"threshold", fit.threshold},
                       {"pass", fit.pass}});
    pass = pass && fit.pass;
  }
  json j;
  j["traces"] = results;
  j["pass"] = pass;
  emit(j, out_path);
  return pass ? kExitOk : kExitVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"first-order Stackelberg solver and verification harness"};
  app.require_subcommand(1);

  std::string config_path, problem_name, out_path;
  long seed = -1;
  long verify_horizon = 60;
  std::vector<std::string> trace_files;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "config file (INI-style sections)");
    sub->add_option("--problem", problem_name, "catalog problem name");
    sub->add_option("--out", out_path, "output path (trace CSV for solve, JSON otherwise)");
    sub->add_option("--seed", seed, "seed for sampled starts / probe points");
    sub->allow_extras();  // section.key=value overrides
  };

  CLI::App* solve = app.add_subcommand("solve", "run the solver, emit trace and summary");
  add_common(solve);
  CLI::App* verify = app.add_subcommand("verify", "run bound suites over a fresh trace");
  add_common(verify);
  verify->add_option("--horizon", verify_horizon, "outer iterations for the fresh trace");
  CLI::App* gradcheck = app.add_subcommand("gradcheck", "finite-difference oracle consistency");
  add_common(gradcheck);
  CLI::App* ratefit = app.add_subcommand("ratefit", "fit gradient-norm decay rates");
  ratefit->add_option("traces", trace_files, "trace CSV files")->required();
  ratefit->add_option("--out", out_path, "JSON report path");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    if (!problem_name.empty()) cfg.problem.name = problem_name;
    if (seed >= 0) cfg.init.seed = static_cast<unsigned long>(seed);
    if (verify->parsed()) cfg.schedule.t_max = verify_horizon;

    if (solve->parsed()) {
      if (!out_path.empty()) cfg.output.trace_path = out_path;
      apply_overrides(cfg, solve->remaining());
      return cmd_solve(cfg);
    }
    if (verify->parsed()) {
      if (!out_path.empty()) cfg.output.summary_path = out_path;
      apply_overrides(cfg, verify->remaining());
      return cmd_verify(cfg);
    }
    if (gradcheck->parsed()) {
      if (!out_path.empty()) cfg.output.summary_path = out_path;
      apply_overrides(cfg, gradcheck->remaining());
      return cmd_gradcheck(cfg);
    }
    if (ratefit->parsed()) return cmd_ratefit(trace_files, out_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const BudgetError& e) {
    std::cerr << "budget error: " << e.what() << "\n";
    return kExitBudget;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
