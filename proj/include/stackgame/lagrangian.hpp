#pragma once

#include "stackgame/operator.hpp"

namespace stackgame {

/// Penalty weight below which the penalized objective is not guaranteed
/// strongly convex in y.
inline double lambda_threshold(const SmoothnessConstants& c) { return 2.0 * c.ell_f1 / c.mu_g; }

/// Curvature of the penalized objective in y at a fixed penalty weight:
/// strongly convex with modulus mu_g*lambda/2 once lambda clears the
/// threshold, smooth with modulus ell_f1 + k*lambda*ell_g1.
struct PenaltyState {
  double lambda = 0.0;
  double mu_l = 0.0;
  double ell_l = 0.0;
};

inline PenaltyState make_penalty_state(const SmoothnessConstants& c, int k, double lambda) {
  if (!(lambda >= lambda_threshold(c) - 1e-12))
    throw std::invalid_argument(
        "penalty weight below the strong-convexity threshold 2*ell_f1/mu_g");
  PenaltyState s;
  s.lambda = lambda;
  s.mu_l = c.mu_g * lambda / 2.0;
  s.ell_l = c.ell_f1 + k * lambda * c.ell_g1;
  return s;
}

/// Constant controlling the gap between the true implicit gradient and the
/// penalized one: the gap at weight lambda is at most k*C_lambda/lambda.
inline double penalty_gap_constant(const SmoothnessConstants& c, int k) {
  const double r = 2.0 * c.ell_f0 / c.mu_g;
  return (c.ell_f1 + k * c.ell_g1 * c.ell_f1 / c.mu_g) * r +
         (c.ell_g1 + 2.0 * c.ell_g1 * c.ell_g1 / c.mu_g) * r * r;
}

/// f(x, y) + lambda * sum_i [ g_i(x, y_i, z_{-i}) - g_i(x, z) ], the penalized
/// objective with the equilibrium argument frozen at z.
inline double surrogate_value(const StackelbergProblem& p, double lambda, const Vec& x,
                              const Vec& y, const Vec& z) {
  double penalty = 0.0;
  for (int i = 0; i < p.num_followers(); ++i)
    penalty += p.followers[i].value(x, p.layout.with_block(z, i, y)) - p.followers[i].value(x, z);
  return p.leader.value(x, y) + lambda * penalty;
}

/// Block gradient in y: grad_{y_i} f(x, y) + lambda * grad_own g_i(x, y_i, z_{-i}).
inline Vec surrogate_grad_y(const StackelbergProblem& p, double lambda, const Vec& x,
                            const Vec& y, const Vec& z) {
  Vec g = p.leader.grad_y(x, y);
  for (int i = 0; i < p.num_followers(); ++i)
    p.layout.segment(g, i) += lambda * p.followers[i].grad_own(x, p.layout.with_block(z, i, y));
  if (!g.allFinite()) throw NumericError("surrogate_grad_y: non-finite gradient", y);
  return g;
}

/// Leader gradient of the frozen-z penalized objective. This is the update
/// direction for x; z never gets differentiated.
inline Vec surrogate_grad_x(const StackelbergProblem& p, double lambda, const Vec& x,
                            const Vec& y, const Vec& z) {
  Vec g = p.leader.grad_x(x, y);
  for (int i = 0; i < p.num_followers(); ++i)
    g += lambda * (p.followers[i].grad_x(x, p.layout.with_block(z, i, y)) -
                   p.followers[i].grad_x(x, z));
  if (!g.allFinite()) throw NumericError("surrogate_grad_x: non-finite gradient", x);
  return g;
}

struct SurrogateMinimizeResult {
  Vec y;
  long iters_used = 0;
  double final_grad_norm = 0.0;
  long grad_evals = 0;  // (k+1) per GD step
};

/// Projected GD on the surrogate in y with step 2/(mu_l + ell_l), warm-started
/// at y_init. tol = 0 forces exactly max_iters steps.
inline SurrogateMinimizeResult minimize_surrogate_in_y(const StackelbergProblem& p, double lambda,
                                                       const Vec& x, const Vec& z,
                                                       const Vec& y_init, long max_iters,
                                                       double tol) {
  if (max_iters < 0) throw std::invalid_argument("minimize_surrogate_in_y: negative budget");
  const PenaltyState s = make_penalty_state(p.constants, p.num_followers(), lambda);
  const double step = 2.0 / (s.mu_l + s.ell_l);
  const int k = p.num_followers();

  SurrogateMinimizeResult res;
  res.y = project(y_init, p.follower_box);
  Vec g = surrogate_grad_y(p, lambda, x, res.y, z);
  while (res.iters_used < max_iters && !(tol > 0.0 && g.norm() <= tol)) {
    res.y = project(res.y - step * g, p.follower_box);
    if (!res.y.allFinite())
      throw NumericError("minimize_surrogate_in_y: iterate diverged", res.y);
    g = surrogate_grad_y(p, lambda, x, res.y, z);
    res.grad_evals += k + 1;
    ++res.iters_used;
  }
  res.final_grad_norm = g.norm();
  return res;
}

}  // namespace stackgame
