#pragma once

#include "stackgame/problem.hpp"
#include "stackgame/random.hpp"

#include <cmath>

namespace stackgame {

/// Stacked gradient operator V(x, y) = (grad_{y_1} g_1, ..., grad_{y_k} g_k).
inline Vec game_operator(const StackelbergProblem& p, const Vec& x, const Vec& y) {
  Vec v(p.layout.total());
  for (int i = 0; i < p.num_followers(); ++i)
    p.layout.segment(v, i) = p.followers[i].grad_own(x, y);
  if (!v.allFinite()) throw NumericError("game_operator: non-finite operator value", y);
  return v;
}

struct MonotonicityReport {
  double min_ratio = 0.0;  // min over sampled pairs of <V(y')-V(y), y'-y> / ||y'-y||^2
  int samples = 0;
  bool pass = false;       // min_ratio >= declared mu_g - 1e-9
};

/// Samples pairs in the follower domain (box, else the working-radius cube) at a
/// fixed leader point and estimates the strong-monotonicity modulus of V.
inline MonotonicityReport check_strong_monotonicity(const StackelbergProblem& p,
                                                    int sample_count, std::uint64_t seed,
                                                    std::optional<Vec> x_at = {}) {
  if (sample_count <= 0) throw std::invalid_argument("monotonicity: sample_count must be positive");
  Rng rng(seed);
  const int n = p.layout.total();
  Vec x = x_at ? *x_at : rng.sample(p.leader_dim, p.leader_box, p.working_radius);
  MonotonicityReport rep;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  for (int s = 0; s < sample_count; ++s) {
    Vec a = rng.sample(n, p.follower_box, p.working_radius);
    Vec b = rng.sample(n, p.follower_box, p.working_radius);
    double d2 = (b - a).squaredNorm();
    if (d2 < 1e-20) continue;  // degenerate pair, resample implicitly
    double ratio = (game_operator(p, x, b) - game_operator(p, x, a)).dot(b - a) / d2;
    rep.min_ratio = std::min(rep.min_ratio, ratio);
    ++rep.samples;
  }
  rep.pass = rep.samples > 0 && rep.min_ratio >= p.constants.mu_g - 1e-9;
  return rep;
}

namespace detail {

// Projected GD on g_i over block i with everything else frozen. Returns the
// best cost found. Step 1/ell_g1; hard cap guards non-convergence.
inline double minimize_own_block(const StackelbergProblem& p, const Vec& x, const Vec& y,
                                 int i, double tol, long hard_cap = 1000000) {
  const double step = 1.0 / p.constants.ell_g1;
  const int off = p.layout.offset(i), len = p.layout.size(i);
  Vec z = y;
  for (long m = 0; m < hard_cap; ++m) {
    Vec g = p.followers[i].grad_own(x, z);
    if (!g.allFinite()) throw NumericError("follower_suboptimality: non-finite gradient", z);
    Vec next = z.segment(off, len) - step * g;
    if (p.follower_box) {
      next = next.cwiseMax(p.follower_box->lower.segment(off, len))
                 .cwiseMin(p.follower_box->upper.segment(off, len));
    }
    // Projected stationarity: ||z_i - P(z_i - step*g)|| / step.
    double res = (z.segment(off, len) - next).norm() / step;
    if (res <= tol) return p.followers[i].value(x, z);
    z.segment(off, len) = next;
  }
  throw BudgetError("follower_suboptimality: inner GD exceeded hard iteration cap");
}

}  // namespace detail

/// Per-follower suboptimality gaps g_i(x, y) - min_{y_i} g_i(x, y_i, y_{-i}).
/// Gaps are accurate to O(inner_tol^2 / mu_g); slightly negative values within
/// that error are possible and left unclamped.
inline Vec follower_suboptimality(const StackelbergProblem& p, const Vec& x, const Vec& y,
                                  double inner_tol = 1e-8) {
  if (!(inner_tol >= 0.0)) throw std::invalid_argument("follower_suboptimality: bad tolerance");
  Vec gaps(p.num_followers());
  for (int i = 0; i < p.num_followers(); ++i)
    gaps[i] = p.followers[i].value(x, y) - detail::minimize_own_block(p, x, y, i, inner_tol);
  return gaps;
}

struct StationarityCertificate {
  double eps = 0.0;
  double max_follower_gap = 0.0;
  double grad_norm = 0.0;
  bool used_true_gradient = false;  // false: surrogate gradient stood in
  bool stationary = false;
};

/// Certifies the pair (x, y): every follower gap <= eps and the leader
/// gradient norm <= eps. Uses true_grad when supplied, else surrogate_grad.
inline StationarityCertificate check_epsilon_stationary(const StackelbergProblem& p,
                                                        const Vec& x, const Vec& y, double eps,
                                                        const std::optional<Vec>& true_grad,
                                                        const Vec& surrogate_grad,
                                                        double inner_tol = 1e-8) {
  if (!(eps > 0.0)) throw std::invalid_argument("check_epsilon_stationary: eps must be positive");
  StationarityCertificate cert;
  cert.eps = eps;
  cert.max_follower_gap = follower_suboptimality(p, x, y, inner_tol).maxCoeff();
  cert.used_true_gradient = true_grad.has_value();
  cert.grad_norm = (true_grad ? *true_grad : surrogate_grad).norm();
  cert.stationary = cert.max_follower_gap <= eps && cert.grad_norm <= eps;
  return cert;
}

}  // namespace stackgame
