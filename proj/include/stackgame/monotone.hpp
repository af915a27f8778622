#pragma once

#include "stackgame/operator.hpp"

namespace stackgame {

enum class MonotoneMethod { kExtragradient, kSimultaneousGD };

struct MonotoneSolveConfig {
  MonotoneMethod method = MonotoneMethod::kExtragradient;
  double step = 0.0;     // <= 0 selects the default 1/(2 ell_g1)
  long max_iters = 1000;
  double tol = 0.0;      // operator-norm stop; 0 runs exactly max_iters
};

struct MonotoneSolveResult {
  Vec z;
  long iters_used = 0;
  double final_operator_norm = 0.0;
  // Method evaluations only: 2k per extragradient iteration, k per GD
  // iteration. Stopping-check evaluations are bookkeeping and not charged.
  long grad_evals = 0;
};

/// One (projected) extragradient step z -> P(z - step * V(x, P(z - step * V(x, z)))).
inline Vec extragradient_step(const StackelbergProblem& p, const Vec& x, const Vec& z,
                              double step) {
  if (!(step > 0.0)) throw std::invalid_argument("extragradient_step: step must be positive");
  Vec mid = project(z - step * game_operator(p, x, z), p.follower_box);
  return project(z - step * game_operator(p, x, mid), p.follower_box);
}

/// Solves the followers' game at fixed x. Identical inputs give bitwise
/// identical iterates; final_operator_norm is the norm at the returned point.
inline MonotoneSolveResult solve_followers_game(const StackelbergProblem& p, const Vec& x,
                                                const Vec& z_init,
                                                const MonotoneSolveConfig& cfg) {
  if (cfg.max_iters < 0) throw std::invalid_argument("solve_followers_game: negative budget");
  const double step = cfg.step > 0.0 ? cfg.step : 1.0 / (2.0 * p.constants.ell_g1);
  if (!(step > 0.0) || !std::isfinite(step))
    throw std::invalid_argument("solve_followers_game: no usable step size");
  const int k = p.num_followers();

  MonotoneSolveResult res;
  res.z = project(z_init, p.follower_box);
  Vec v = game_operator(p, x, res.z);
  while (res.iters_used < cfg.max_iters && !(cfg.tol > 0.0 && v.norm() <= cfg.tol)) {
    if (cfg.method == MonotoneMethod::kExtragradient) {
      Vec mid = project(res.z - step * v, p.follower_box);
      res.z = project(res.z - step * game_operator(p, x, mid), p.follower_box);
      res.grad_evals += 2 * k;
    } else {
      res.z = project(res.z - step * v, p.follower_box);
      res.grad_evals += k;
    }
    if (!res.z.allFinite())
      throw NumericError("solve_followers_game: iterate diverged", res.z);
    v = game_operator(p, x, res.z);
    ++res.iters_used;
  }
  res.final_operator_norm = v.norm();
  return res;
}

}  // namespace stackgame
