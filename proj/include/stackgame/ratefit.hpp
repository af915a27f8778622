#pragma once

#include "stackgame/outer_loop.hpp"

namespace stackgame {

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int points = 0;
  double threshold = 0.0;  // -1/(6+alpha) plus slack
  bool pass = false;
};

/// Least-squares fit of log(min_{s<=t} ||grad F(x_s)||) against
/// log(cumulative gradient evaluations). Records without an oracle-backed
/// gradient norm are rejected; the fit needs at least five usable points.
/// The theoretical rate is a worst case, so matching or beating
/// -1/(6+alpha) + slack passes.
inline RateFit fit_rate(const std::vector<IterationRecord>& trace, double alpha,
                        double slack = 0.05) {
  std::vector<double> lx, ly;
  double best = std::numeric_limits<double>::infinity();
  for (const IterationRecord& r : trace) {
    if (!r.true_grad_norm)
      throw std::invalid_argument("fit_rate: trace lacks oracle-backed gradient norms");
    best = std::min(best, *r.true_grad_norm);
    if (best <= 0.0 || r.grad_evals_cum <= 0) continue;
    lx.push_back(std::log(static_cast<double>(r.grad_evals_cum)));
    ly.push_back(std::log(best));
  }
  RateFit fit;
  fit.points = static_cast<int>(lx.size());
  if (fit.points < 5) throw std::invalid_argument("fit_rate: fewer than 5 usable points");

  const double n = static_cast<double>(fit.points);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int i = 0; i < fit.points; ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
    syy += ly[i] * ly[i];
  }
  const double vx = sxx - sx * sx / n;
  const double vy = syy - sy * sy / n;
  const double cxy = sxy - sx * sy / n;
  if (vx <= 0.0) throw std::invalid_argument("fit_rate: evaluation counts are all equal");
  fit.slope = cxy / vx;
  fit.intercept = (sy - fit.slope * sx) / n;
  fit.r2 = vy > 0.0 ? cxy * cxy / (vx * vy) : 1.0;
  fit.threshold = -1.0 / (6.0 + alpha) + slack;
  fit.pass = fit.slope <= fit.threshold;
  return fit;
}

}  // namespace stackgame
