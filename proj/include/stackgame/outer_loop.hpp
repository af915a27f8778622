#pragma once

#include "stackgame/monotone.hpp"
#include "stackgame/schedule.hpp"

#include <functional>

namespace stackgame {

/// Exact ground-truth callbacks used for stopping certification and trace
/// telemetry only; the x/y/z updates never touch these. Typically backed by
/// the quadratic oracle, wired up by the caller.
struct CertificationHooks {
  std::function<Vec(const Vec& x)> true_gradient;                    // grad F(x)
  std::function<Vec(const Vec& x)> followers_equilibrium;            // y*(x)
  std::function<Vec(double lambda, const Vec& x)> lagrangian_minimizer;  // y*_lambda(x)
  std::function<double(const Vec& x)> leader_value;                  // F(x)
  std::function<double()> optimal_value;                             // F(x*)

  bool complete() const {
    return true_gradient && followers_equilibrium && lagrangian_minimizer && leader_value &&
           optimal_value;
  }
};

/// One outer iteration. x is the leader iterate the gradients were taken at
/// (pre-update); y and z diagnostics describe the freshly computed inner
/// solutions. Oracle-backed fields are absent when no hooks were supplied.
struct IterationRecord {
  long t = 0;
  double lambda = 0.0;
  double delta = 0.0;
  double eta = 0.0;
  long m_y = 0;  // surrogate GD steps actually consumed
  long m_z = 0;  // equilibrium iterations actually consumed
  long grad_evals_cum = 0;
  double surrogate_grad_norm = 0.0;
  std::optional<double> true_grad_norm;
  double follower_gap_max = 0.0;
  std::optional<double> e1, e2, e3;  // error-decomposition terms
  std::optional<double> err_sq;      // 0.25 * ||surrogate grad - grad F||^2
  std::optional<double> f_value;     // F(x_t)
  Vec x;

  // Diagnostics beyond the serialized schema.
  long m_y_budget = 0;
  long m_z_budget = 0;
  double y_z_gap = 0.0;          // ||y_{t+1} - z_{t+1}||
  double z_residual_norm = 0.0;  // operator norm at returned z
  std::optional<double> y_eq_dist;  // ||y_{t+1} - y*(x_t)||
};

enum class SolveStatus { kConverged, kBudgetExhausted, kNumericFailure };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kConverged: return "converged";
    case SolveStatus::kBudgetExhausted: return "budget_exhausted";
    case SolveStatus::kNumericFailure: return "numeric_failure";
  }
  return "unknown";
}

struct SolveOutcome {
  SolveStatus status = SolveStatus::kBudgetExhausted;
  std::vector<IterationRecord> trace;
  JointPoint final_point;
  StationarityCertificate final_certificate;
  JointPoint best_point;        // iterate with the smallest recorded gradient norm
  long best_t = 0;
  double best_grad_norm = std::numeric_limits<double>::infinity();
  bool best_grad_is_true = false;
  long total_grad_evals = 0;
  double eta = 0.0;
  double alpha = 0.0;  // implied evaluation-decay exponent of the schedule
  std::string failure_message;  // set on numeric failure
};

namespace detail {
inline Vec default_point(int dim, const std::optional<Box>& box) {
  if (box) return 0.5 * (box->lower + box->upper);
  return Vec::Zero(dim);
}
}  // namespace detail

/// Three-loop solver: per outer iteration, (1) extragradient on the followers'
/// game for z, (2) warm-started projected GD on the frozen-z surrogate for y,
/// (3) one projected leader step, with the penalty weight on the t^rho
/// schedule. Stops at the first iterate certified target_eps-stationary.
inline SolveOutcome run(const StackelbergProblem& p, const ScheduleParams& params,
                        const CertificationHooks* hooks = nullptr,
                        const std::function<void(const IterationRecord&)>& sink = {}) {
  p.validate();
  params.validate();
  if (hooks && !hooks->complete())
    throw std::invalid_argument("run: certification hooks must be complete or absent");

  const int k = p.num_followers();
  const SmoothnessConstants& c = p.constants;
  if (params.lambda_cap < std::max(1.0, lambda_threshold(c)))
    throw std::invalid_argument("run: lambda_cap below the penalty floor");

  SolveOutcome out;
  out.eta = params.eta > 0.0 ? params.eta : 1.0 / implicit_gradient_smoothness(c);
  out.alpha = alpha_exponent(params);
  const double big_c_z =
      params.big_c_z > 0.0 ? params.big_c_z : k * c.ell_g1 * params.z_dist0;
  const double c_lambda = penalty_gap_constant(c, k);

  if ((params.x0 && params.x0->size() != p.leader_dim) ||
      (params.y0 && params.y0->size() != p.layout.total()) ||
      (params.z0 && params.z0->size() != p.layout.total()))
    throw std::invalid_argument("run: initial point dimensions do not match the problem");
  Vec x = project(params.x0 ? *params.x0 : detail::default_point(p.leader_dim, p.leader_box),
                  p.leader_box);
  Vec y = project(params.y0 ? *params.y0 : detail::default_point(p.layout.total(), p.follower_box),
                  p.follower_box);
  Vec z = project(params.z0 ? *params.z0 : y, p.follower_box);

  try {
    for (long t = 1; t <= params.t_max; ++t) {
      const PenaltyWeight w = schedule_lambda(t, params, c);
      const PenaltyState ps = make_penalty_state(c, k, w.lambda);

      MonotoneSolveConfig zc;
      zc.max_iters = budget_Mz(t, k, big_c_z, c, params);
      zc.tol = z_stop_tol(t, k, w.lambda, c, params);
      const MonotoneSolveResult zres = solve_followers_game(p, x, z, zc);
      z = zres.z;

      const long my_budget = budget_My(t, k, ps, params);
      const SurrogateMinimizeResult yres = minimize_surrogate_in_y(
          p, w.lambda, x, z, y, my_budget, y_stop_tol(t, k, ps, c, params));
      y = yres.y;

      const Vec gx = surrogate_grad_x(p, w.lambda, x, y, z);
      out.total_grad_evals += zres.grad_evals + yres.grad_evals + 2 * k + 1;

      IterationRecord rec;
      rec.t = t;
      rec.lambda = w.lambda;
      rec.delta = w.delta;
      rec.eta = out.eta;
      rec.m_y = yres.iters_used;
      rec.m_z = zres.iters_used;
      rec.m_y_budget = my_budget;
      rec.m_z_budget = zc.max_iters;
      rec.grad_evals_cum = out.total_grad_evals;
      rec.surrogate_grad_norm = gx.norm();
      rec.x = x;
      rec.y_z_gap = (y - z).norm();
      rec.z_residual_norm = zres.final_operator_norm;

      std::optional<Vec> tg;
      if (hooks) {
        tg = hooks->true_gradient(x);
        rec.true_grad_norm = tg->norm();
        rec.err_sq = 0.25 * (gx - *tg).squaredNorm();
        const Vec y_eq = hooks->followers_equilibrium(x);
        const Vec y_lam = hooks->lagrangian_minimizer(w.lambda, x);
        rec.y_eq_dist = (y - y_eq).norm();
        rec.e1 = (c.ell_f1 * c.ell_f1 + 5.0 * k * k * w.lambda * w.lambda) *
                 (y - y_lam).squaredNorm();
        rec.e2 = 2.0 * k * k * w.lambda * w.lambda * (z - y_eq).squaredNorm();
        rec.e3 = (k * c_lambda / w.lambda) * (k * c_lambda / w.lambda);
        rec.f_value = hooks->leader_value(x);
      }

      const StationarityCertificate cert = check_epsilon_stationary(
          p, x, y, params.target_eps, tg, gx, params.stationarity_inner_tol);
      rec.follower_gap_max = cert.max_follower_gap;

      out.trace.push_back(rec);
      if (sink) sink(rec);

      const double grad_norm = tg ? rec.true_grad_norm.value() : rec.surrogate_grad_norm;
      if (grad_norm < out.best_grad_norm) {
        out.best_grad_norm = grad_norm;
        out.best_point = {x, y};
        out.best_t = t;
        out.best_grad_is_true = tg.has_value();
      }

      if (cert.stationary) {
        out.status = SolveStatus::kConverged;
        out.final_point = {x, y};
        out.final_certificate = cert;
        return out;
      }

      x = project(x - out.eta * gx, p.leader_box);
      out.final_point = {x, y};
      out.final_certificate = cert;
    }
  } catch (const NumericError& e) {
    out.status = SolveStatus::kNumericFailure;
    out.failure_message = e.what();
    return out;  // partial trace attached
  }
  out.status = SolveStatus::kBudgetExhausted;
  return out;
}

struct CheckReport {
  std::string name;
  double max_violation = 0.0;  // worst slack overrun across the checked items
  int checked = 0;
  bool pass = false;
};

/// Per-step descent of the implicit objective against the recorded error:
/// F(x_{t+1}) - F(x_t) <= -(eta/2)||grad F(x_t)||^2 + (eta/2)||grad F - surrogate||^2,
/// plus the summed form sum (1/(4 ell_F1)) ||grad F_t||^2 <= F(x_1) - F* + (1/ell_F1) sum err_t^2.
inline CheckReport descent_check(const std::vector<IterationRecord>& trace,
                                 const CertificationHooks& hooks, double ell_f1_implicit,
                                 double tol = 1e-9) {
  CheckReport rep{"descent", 0.0, 0, false};
  double sum_sq_grad = 0.0, sum_err = 0.0;
  for (size_t i = 0; i < trace.size(); ++i) {
    const IterationRecord& r = trace[i];
    if (!r.f_value || !r.true_grad_norm || !r.err_sq) continue;
    sum_sq_grad += *r.true_grad_norm * *r.true_grad_norm;
    sum_err += *r.err_sq;
    if (i + 1 < trace.size() && trace[i + 1].f_value) {
      const double lhs = *trace[i + 1].f_value - *r.f_value;
      const double rhs = -(r.eta / 2.0) * *r.true_grad_norm * *r.true_grad_norm +
                         (r.eta / 2.0) * 4.0 * *r.err_sq;
      rep.max_violation = std::max(rep.max_violation, lhs - rhs);
      ++rep.checked;
    }
  }
  if (!trace.empty() && trace.front().f_value) {
    const double budget = *trace.front().f_value - hooks.optimal_value() +
                          sum_err / ell_f1_implicit;
    rep.max_violation =
        std::max(rep.max_violation, sum_sq_grad / (4.0 * ell_f1_implicit) - budget);
    ++rep.checked;
  }
  rep.pass = rep.checked > 0 && rep.max_violation <= tol;
  return rep;
}

/// Recorded leader-gradient error against its three-term budget, per iteration:
/// err_t^2 <= E1 + E2 + E3 with a relative slack.
inline CheckReport error_decomposition_check(const std::vector<IterationRecord>& trace,
                                             double tol = 1e-9) {
  CheckReport rep{"error_decomposition", 0.0, 0, false};
  for (const IterationRecord& r : trace) {
    if (!r.err_sq || !r.e1 || !r.e2 || !r.e3) continue;
    const double budget = *r.e1 + *r.e2 + *r.e3;
    rep.max_violation = std::max(rep.max_violation, *r.err_sq - budget - tol * budget);
    ++rep.checked;
  }
  rep.pass = rep.checked > 0 && rep.max_violation <= tol;
  return rep;
}

/// Leader step length against eta * (ell_f0 + 2k * ell_g0); constants must be
/// valid over the visited region (always true on box-bounded problems).
inline CheckReport leader_step_check(const std::vector<IterationRecord>& trace, int k,
                                     const SmoothnessConstants& c, double tol = 1e-9) {
  CheckReport rep{"leader_step", 0.0, 0, false};
  for (size_t i = 0; i + 1 < trace.size(); ++i) {
    const double lhs = (trace[i + 1].x - trace[i].x).norm();
    const double rhs = trace[i].eta * (c.ell_f0 + 2.0 * k * c.ell_g0);
    rep.max_violation = std::max(rep.max_violation, lhs - rhs);
    ++rep.checked;
  }
  rep.pass = rep.checked > 0 && rep.max_violation <= tol;
  return rep;
}

/// Inner-solution split: ||y_{t+1} - z_{t+1}|| is within the distance of y to
/// the exact equilibrium plus the monotonicity bound ||V(z)||/mu_g on z's error.
inline CheckReport inner_consistency_check(const std::vector<IterationRecord>& trace,
                                           double mu_g, double tol = 1e-9) {
  CheckReport rep{"inner_consistency", 0.0, 0, false};
  for (const IterationRecord& r : trace) {
    if (!r.y_eq_dist) continue;
    const double rhs = *r.y_eq_dist + r.z_residual_norm / mu_g;
    rep.max_violation = std::max(rep.max_violation, r.y_z_gap - rhs);
    ++rep.checked;
  }
  rep.pass = rep.checked > 0 && rep.max_violation <= tol;
  return rep;
}

}  // namespace stackgame
