#pragma once

#include "stackgame/lagrangian.hpp"

#include <cmath>

namespace stackgame {

/// Tunables of the three-loop solver. Zeros mean "derive the default".
struct ScheduleParams {
  double rho = 1.5;         // penalty growth exponent, > 1
  double eps_prime = 0.1;   // slack exponent in the inner budgets, > 0
  double eta = 0.0;         // leader step; <= 0 derives 1/ell_F1
  double lambda_cap = 1e8;
  long t_max = 500;
  double target_eps = 1e-2;
  double c_y = 1.0;         // inner budget multipliers
  double c_z = 1.0;
  double big_c_z = 0.0;     // C_z; <= 0 derives k * ell_g1 * z_dist0
  double z_dist0 = 1.0;     // initial-distance estimate feeding the C_z default
  double y_tol_scale = 1.0; // scales on the derived inner stopping tolerances
  double z_tol_scale = 1.0;
  double stationarity_inner_tol = 1e-8;
  std::optional<Vec> x0, y0, z0;  // defaults: box center when boxed, else zeros

  void validate() const {
    if (!(rho > 1.0)) throw std::invalid_argument("schedule: rho must exceed 1");
    if (!(eps_prime > 0.0)) throw std::invalid_argument("schedule: eps_prime must be positive");
    if (!(lambda_cap > 0.0)) throw std::invalid_argument("schedule: lambda_cap must be positive");
    if (t_max < 1) throw std::invalid_argument("schedule: t_max must be at least 1");
    if (!(target_eps > 0.0)) throw std::invalid_argument("schedule: target_eps must be positive");
    if (!(c_y > 0.0) || !(c_z > 0.0))
      throw std::invalid_argument("schedule: budget multipliers must be positive");
    if (!(z_dist0 > 0.0) || !(y_tol_scale > 0.0) || !(z_tol_scale > 0.0))
      throw std::invalid_argument("schedule: scales must be positive");
  }
};

/// Gradient-evaluation decay exponent implied by the schedule; the overall
/// rate is eps^-(6+alpha).
inline double alpha_exponent(const ScheduleParams& s) {
  return 2.0 * (s.rho - 1.0 + s.eps_prime);
}

struct PenaltyWeight {
  double lambda = 0.0;
  double delta = 0.0;  // raw increment t^rho - (t-1)^rho, never floored or capped
};

/// lambda_t = min(cap, max(floor, t^rho)) with floor = max(1, 2*ell_f1/mu_g).
inline PenaltyWeight schedule_lambda(long t, const ScheduleParams& s,
                                     const SmoothnessConstants& c) {
  if (t < 1) throw std::invalid_argument("schedule_lambda: t starts at 1");
  const double floor = std::max(1.0, lambda_threshold(c));
  PenaltyWeight w;
  w.lambda = std::min(s.lambda_cap, std::max(floor, std::pow(double(t), s.rho)));
  w.delta = std::pow(double(t), s.rho) - std::pow(double(t - 1), s.rho);
  return w;
}

namespace detail {
inline long ceil_budget(double v) {
  if (!(v > 0.0)) return 1;
  if (v > 9.0e15) return 9000000000000000L;  // saturate instead of overflowing
  return std::max(1L, static_cast<long>(std::ceil(v)));
}
}  // namespace detail

/// GD steps needed on the surrogate at iteration t:
/// ceil(c_y * (ell_l/mu_l + 1) * ((3+eps')/2 * ln t + ln k)), at least 1.
inline long budget_My(long t, int k, const PenaltyState& ps, const ScheduleParams& s) {
  if (t < 1 || k < 1) throw std::invalid_argument("budget_My: t and k start at 1");
  const double v = s.c_y * (ps.ell_l / ps.mu_l + 1.0) *
                   ((3.0 + s.eps_prime) / 2.0 * std::log(double(t)) + std::log(double(k)));
  return detail::ceil_budget(v);
}

/// Equilibrium-solve budget at iteration t:
/// ceil(c_z * C_z * k * t^(rho+eps'+1) / mu_g), at least 1. Linear in k for fixed C_z.
inline long budget_Mz(long t, int k, double big_c_z, const SmoothnessConstants& c,
                      const ScheduleParams& s) {
  if (t < 1 || k < 1) throw std::invalid_argument("budget_Mz: t and k start at 1");
  const double v =
      s.c_z * big_c_z * k * std::pow(double(t), s.rho + s.eps_prime + 1.0) / c.mu_g;
  return detail::ceil_budget(v);
}

/// Smoothness modulus of the implicit objective F(x) = f(x, y*(x)):
/// (ell_f1 + ell_f0*ell_g2/mu_g + ell_g1*ell_f1/mu_g) * (1 + ell_g1/mu_g).
inline double implicit_gradient_smoothness(const SmoothnessConstants& c) {
  const double a = c.ell_g1 / c.mu_g;
  return (c.ell_f1 + c.ell_f0 * c.ell_g2 / c.mu_g + a * c.ell_f1) * (1.0 + a);
}

/// Early-stop tolerance for the equilibrium solve at iteration t. Via strong
/// monotonicity ||z - y*|| <= ||V(z)||/mu_g, stopping at this operator norm
/// keeps the E2 error term below t^-(1+eps').
inline double z_stop_tol(long t, int k, double lambda, const SmoothnessConstants& c,
                         const ScheduleParams& s) {
  return s.z_tol_scale * c.mu_g * std::pow(double(t), -(1.0 + s.eps_prime) / 2.0) /
         (std::sqrt(2.0) * k * lambda);
}

/// Early-stop tolerance for the surrogate minimization at iteration t; keeps
/// the E1 error term below t^-(1+eps') through ||y - y*_l|| <= ||grad||/mu_l.
inline double y_stop_tol(long t, int k, const PenaltyState& ps, const SmoothnessConstants& c,
                         const ScheduleParams& s) {
  const double w = std::sqrt(c.ell_f1 * c.ell_f1 + 5.0 * k * k * ps.lambda * ps.lambda);
  return s.y_tol_scale * ps.mu_l * std::pow(double(t), -(1.0 + s.eps_prime) / 2.0) / w;
}

}  // namespace stackgame
