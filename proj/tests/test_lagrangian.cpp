#include "test_support.hpp"

namespace stackgame {
namespace {

using test::vec;

TEST(LambdaThreshold, FormulaInstances) {
  EXPECT_DOUBLE_EQ(lambda_threshold(test::sq2().problem.constants), 2.0);
  SmoothnessConstants c{2.0, 1.0, 3.0, 1.0, 4.0, 0.0};
  EXPECT_DOUBLE_EQ(lambda_threshold(c), 3.0);
  c.ell_f1 = c.mu_g;
  EXPECT_DOUBLE_EQ(lambda_threshold(c), 2.0);
}

TEST(PenaltyState, ConvexityAndSmoothnessModuli) {
  const SmoothnessConstants& c = test::sq2().problem.constants;
  const PenaltyState ps = make_penalty_state(c, 2, 2.0);
  EXPECT_DOUBLE_EQ(ps.lambda, 2.0);
  EXPECT_DOUBLE_EQ(ps.mu_l, 1.0);        // mu_g * lambda / 2
  EXPECT_DOUBLE_EQ(ps.ell_l, 9.0);       // ell_f1 + k * lambda * ell_g1
  EXPECT_LE(ps.mu_l, ps.ell_l);
  EXPECT_THROW(make_penalty_state(c, 2, 1.9), std::invalid_argument);
}

TEST(PenaltyGapConstant, CanonicalValue) {
  EXPECT_DOUBLE_EQ(penalty_gap_constant(test::sq2().problem.constants, 2), 50.0);
}

TEST(SurrogateValue, PinnedEvaluations) {
  const StackelbergProblem& p = test::sq2().problem;
  EXPECT_NEAR(surrogate_value(p, 1.0, vec({1.0}), vec({1.0, 1.0}), vec({1.0, 1.0})), 1.5, 1e-15);
  EXPECT_NEAR(surrogate_value(p, 2.0, vec({1.0}), vec({0.5, 0.5}), vec({1.0, 1.0})), 1.25, 1e-15);
  // y = z collapses the penalty exactly to f
  Rng rng(2);
  for (int s = 0; s < 10; ++s) {
    const Vec x = test::sample_x(p, rng);
    const Vec y = test::sample_y(p, rng);
    EXPECT_NEAR(surrogate_value(p, 7.0, x, y, y), p.leader.value(x, y), 1e-14);
  }
}

TEST(SurrogateGradY, PinnedEvaluations) {
  const StackelbergProblem& p = test::sq2().problem;
  EXPECT_LT(surrogate_grad_y(p, 1.0, vec({1.0}), vec({0.5, 0.5}), vec({1.0, 1.0})).norm(), 1e-15);
  EXPECT_LT((surrogate_grad_y(p, 1.0, vec({1.0}), vec({1.0, 1.0}), vec({1.0, 1.0})) -
             vec({1.0, 1.0}))
                .norm(),
            1e-15);
  // first-order optimality at the closed-form minimizer lambda x/(1+lambda)
  const double lambda = 8.0;
  const Vec ymin = vec({8.0 / 9.0, 8.0 / 9.0});
  EXPECT_LE(surrogate_grad_y(p, lambda, vec({1.0}), ymin, vec({1.0, 1.0})).norm(), 1e-10);
}

TEST(SurrogateGradX, PinnedEvaluationsAndLimit) {
  const StackelbergProblem& p = test::sq2().problem;
  EXPECT_NEAR(surrogate_grad_x(p, 1.0, vec({1.0}), vec({0.5, 0.5}), vec({1.0, 1.0}))[0], 2.0,
              1e-15);
  // y = z cancels the penalty gradients
  Rng rng(3);
  for (int s = 0; s < 10; ++s) {
    const Vec x = test::sample_x(p, rng);
    const Vec y = test::sample_y(p, rng);
    EXPECT_NEAR(surrogate_grad_x(p, 5.0, x, y, y)[0], p.leader.grad_x(x, y)[0], 1e-14);
  }
  // at the exact inner solutions the surrogate gradient tends to grad F(1) = 3
  const double lambda = double(1 << 20);
  const Vec ymin = vec({lambda / (1 + lambda), lambda / (1 + lambda)});
  EXPECT_NEAR(surrogate_grad_x(p, lambda, vec({1.0}), ymin, vec({1.0, 1.0}))[0], 3.0, 1e-5);
}

TEST(MinimizeSurrogate, ReachesClosedFormMinimizer) {
  const StackelbergProblem& p = test::sq2().problem;
  const SurrogateMinimizeResult res = minimize_surrogate_in_y(
      p, 2.0, vec({1.0}), vec({1.0, 1.0}), vec({0.0, 0.0}), 10000, 1e-12);
  EXPECT_LT((res.y - vec({2.0 / 3.0, 2.0 / 3.0})).norm(), 1e-8);
  EXPECT_LE(res.final_grad_norm, 1e-12);
  EXPECT_EQ(res.grad_evals, 3 * res.iters_used);  // k + 1 evals per step
}

TEST(MinimizeSurrogate, AlreadyAtMinimizerReturnsImmediately) {
  const StackelbergProblem& p = test::sq2().problem;
  const SurrogateMinimizeResult res = minimize_surrogate_in_y(
      p, 2.0, vec({1.0}), vec({1.0, 1.0}), vec({2.0 / 3.0, 2.0 / 3.0}), 100, 1e-10);
  EXPECT_EQ(res.iters_used, 0);
}

TEST(MinimizeSurrogate, BelowThresholdRefusesToRun) {
  const StackelbergProblem& p = test::sq2().problem;
  EXPECT_THROW(minimize_surrogate_in_y(p, 1.9, vec({1.0}), vec({1.0, 1.0}), vec({0.0, 0.0}),
                                       100, 1e-10),
               std::invalid_argument);
}

TEST(SurrogateGradients, MatchFiniteDifferencesOnCatalog) {
  for (const ProblemCatalogEntry& e : catalog()) {
    const StackelbergProblem& p = e.problem;
    const double floor = lambda_threshold(p.constants);
    Rng rng(17);
    double worst = 0.0;
    for (int s = 0; s < 50; ++s) {
      const double lambda = floor * (1.0 + 3.0 * rng.unit());
      const Vec x = test::sample_x(p, rng);
      const Vec y = test::sample_y(p, rng);
      const Vec z = test::sample_y(p, rng);
      const Vec fx =
          fd_gradient([&](const Vec& v) { return surrogate_value(p, lambda, v, y, z); }, x);
      const Vec fy =
          fd_gradient([&](const Vec& v) { return surrogate_value(p, lambda, x, v, z); }, y);
      worst = std::max(worst, test::rel_err(fx, surrogate_grad_x(p, lambda, x, y, z)));
      worst = std::max(worst, test::rel_err(fy, surrogate_grad_y(p, lambda, x, y, z)));
    }
    EXPECT_LE(worst, 1e-5) << e.name;
  }
}

TEST(SurrogateGeometry, StrongConvexityAlongSampledPairs) {
  for (const ProblemCatalogEntry* e : {&test::sq2(), &test::coupled_half(), &test::cournot2()}) {
    const StackelbergProblem& p = e->problem;
    const double lambda = 2.0 * lambda_threshold(p.constants);
    const PenaltyState ps = make_penalty_state(p.constants, p.num_followers(), lambda);
    Rng rng(23);
    for (int s = 0; s < 100; ++s) {
      const Vec x = test::sample_x(p, rng);
      const Vec z = test::sample_y(p, rng);
      const Vec y = test::sample_y(p, rng);
      const Vec y2 = test::sample_y(p, rng);
      const double lhs = surrogate_value(p, lambda, x, y2, z);
      const double rhs = surrogate_value(p, lambda, x, y, z) +
                         surrogate_grad_y(p, lambda, x, y, z).dot(y2 - y) +
                         0.5 * ps.mu_l * (y2 - y).squaredNorm();
      EXPECT_GE(lhs - rhs, -1e-9) << e->name;
    }
  }
}

TEST(SurrogateGeometry, GradientLipschitzAlongSampledPairs) {
  for (const ProblemCatalogEntry* e : {&test::sq2(), &test::coupled_half(), &test::cournot2()}) {
    const StackelbergProblem& p = e->problem;
    const double lambda = 3.0 * lambda_threshold(p.constants);
    const PenaltyState ps = make_penalty_state(p.constants, p.num_followers(), lambda);
    Rng rng(29);
    for (int s = 0; s < 100; ++s) {
      const Vec x = test::sample_x(p, rng);
      const Vec z = test::sample_y(p, rng);
      const Vec y = test::sample_y(p, rng);
      const Vec y2 = test::sample_y(p, rng);
      const double lhs = (surrogate_grad_y(p, lambda, x, y2, z) -
                          surrogate_grad_y(p, lambda, x, y, z))
                             .norm();
      EXPECT_LE(lhs, ps.ell_l * (y2 - y).norm() * (1.0 + 1e-9)) << e->name;
    }
  }
}

// GD contraction against the exact penalized minimizer, budget by budget.
TEST(MinimizeSurrogate, ContractionBoundAgainstOracleMinimizer) {
  for (const ProblemCatalogEntry* e : {&test::sq2(), &test::coupled_half()}) {
    const StackelbergProblem& p = e->problem;
    const QuadraticOracle oracle(*e->spec);
    const double lambda = 2.5 * lambda_threshold(p.constants);
    const PenaltyState ps = make_penalty_state(p.constants, p.num_followers(), lambda);
    const double rate = 1.0 - 2.0 * ps.mu_l / (ps.mu_l + ps.ell_l);
    Rng rng(31);
    const Vec x = test::sample_x(p, rng);
    const Vec z = oracle.followers_equilibrium(x);
    const Vec y0 = test::sample_y(p, rng);
    const Vec ystar = oracle.lagrangian_minimizer(lambda, x);
    const double d0 = (y0 - ystar).norm();
    for (long m : {1L, 3L, 10L, 30L}) {
      const SurrogateMinimizeResult res =
          minimize_surrogate_in_y(p, lambda, x, z, y0, m, 0.0);
      EXPECT_EQ(res.iters_used, m);
      EXPECT_LE((res.y - ystar).norm(), std::pow(rate, m / 2.0) * d0 + 1e-9) << e->name;
    }
  }
}

// Exact minimizer drift toward the equilibrium as the penalty grows:
// per-block distance at most 2 ell_f0 / (lambda mu_g).
TEST(PenalizedMinimizer, EquilibriumGapBoundOnPenaltyGrid) {
  for (const ProblemCatalogEntry* e : {&test::sq2(), &test::coupled_half(), &test::cournot2()}) {
    const StackelbergProblem& p = e->problem;
    const QuadraticOracle oracle(*e->spec);
    const SmoothnessConstants& c = p.constants;
    const double floor = lambda_threshold(c);
    for (int j = 1; j <= 10; ++j) {
      const double lambda = double(1L << j);
      if (lambda < floor) continue;
      for (int g = 0; g <= 10; ++g) {
        const double f = g / 10.0;
        const Vec x = p.leader_box->lower + f * (p.leader_box->upper - p.leader_box->lower);
        const Vec diff =
            oracle.lagrangian_minimizer(lambda, x) - oracle.followers_equilibrium(x);
        for (int i = 0; i < p.num_followers(); ++i)
          EXPECT_LE(p.layout.segment(diff, i).norm(),
                    2.0 * c.ell_f0 / (lambda * c.mu_g) * (1.0 + 1e-9))
              << e->name;
      }
    }
  }
}

// Joint Lipschitz bound of the penalized minimizer in (x, lambda).
TEST(PenalizedMinimizer, JointContinuityBoundSampled) {
  for (const ProblemCatalogEntry* e : {&test::sq2(), &test::coupled_half()}) {
    const StackelbergProblem& p = e->problem;
    const QuadraticOracle oracle(*e->spec);
    const SmoothnessConstants& c = p.constants;
    const double floor = lambda_threshold(c);
    Rng rng(37);
    for (int s = 0; s < 50; ++s) {
      const Vec x1 = test::sample_x(p, rng);
      const Vec x2 = test::sample_x(p, rng);
      const double l1 = floor * (1.0 + 4.0 * rng.unit());
      const double l2 = l1 * (1.0 + 3.0 * rng.unit());
      const double lhs =
          (oracle.lagrangian_minimizer(l1, x1) - oracle.lagrangian_minimizer(l2, x2)).norm();
      const double rhs = ((x1 - x2).norm() * (c.ell_f1 + c.ell_g1 * l2) +
                          (l2 - l1) * c.ell_f0 / l1) *
                         2.0 / (c.mu_g * l2);
      EXPECT_LE(lhs, rhs * (1.0 + 1e-9)) << e->name;
    }
  }
}

}  // namespace
}  // namespace stackgame
