#include "test_support.hpp"

#include <Eigen/Eigenvalues>

#include <set>

namespace stackgame {
namespace {

using test::vec;

TEST(Catalog, SixUniqueValidatedEntries) {
  const std::vector<ProblemCatalogEntry> entries = catalog();
  ASSERT_EQ(entries.size(), 6u);
  std::set<std::string> names;
  for (const ProblemCatalogEntry& e : entries) {
    names.insert(e.name);
    EXPECT_NO_THROW(e.problem.validate()) << e.name;
    EXPECT_TRUE(e.spec.has_value()) << e.name;
    EXPECT_FALSE(e.description.empty()) << e.name;
  }
  EXPECT_EQ(names.size(), 6u);
  EXPECT_TRUE(names.count("sq2"));
  EXPECT_TRUE(names.count("coupled-0.25"));
  EXPECT_TRUE(names.count("coupled-0.5"));
  EXPECT_TRUE(names.count("coupled-0.8"));
  EXPECT_TRUE(names.count("cournot-k2"));
  EXPECT_TRUE(names.count("cournot-k3"));
}

TEST(Catalog, FindByNameAndRejectUnknown) {
  EXPECT_EQ(find_problem("sq2").name, "sq2");
  try {
    find_problem("nope");
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("sq2"), std::string::npos);
  }
}

TEST(Catalog, CanonicalInstanceConstants) {
  const StackelbergProblem& p = test::sq2().problem;
  EXPECT_DOUBLE_EQ(p.constants.mu_g, 1.0);
  EXPECT_DOUBLE_EQ(p.constants.ell_f0, 1.0);
  EXPECT_DOUBLE_EQ(p.constants.ell_f1, 1.0);
  EXPECT_DOUBLE_EQ(p.constants.ell_g0, 2.0);
  EXPECT_DOUBLE_EQ(p.constants.ell_g1, 2.0);
  EXPECT_DOUBLE_EQ(p.constants.ell_g2, 0.0);
  EXPECT_EQ(p.leader_dim, 1);
  EXPECT_EQ(p.layout.blocks(), 2);
  ASSERT_TRUE(p.leader_box.has_value());
  EXPECT_DOUBLE_EQ(p.leader_box->upper[0], 1.0);
}

// The generic problem callbacks are built from the same spec the oracle
// consumes; both views of every gradient must agree to float accuracy.
TEST(Catalog, ProblemOraclesMatchSpecDerivedGradients) {
  for (const ProblemCatalogEntry& e : catalog()) {
    const QuadraticGameSpec& s = *e.spec;
    const StackelbergProblem& p = e.problem;
    Rng rng(19);
    for (int t = 0; t < 20; ++t) {
      const Vec x = test::sample_x(p, rng);
      const Vec y = test::sample_y(p, rng);
      const Vec v = s.joint(x, y);
      const Vec grad_f = s.Q * v + s.q;
      EXPECT_LE((p.leader.grad_x(x, y) - grad_f.head(p.leader_dim)).norm(), 1e-12) << e.name;
      EXPECT_LE((p.leader.grad_y(x, y) - grad_f.tail(p.layout.total())).norm(), 1e-12)
          << e.name;
      EXPECT_NEAR(p.leader.value(x, y), s.leader_cost(v), 1e-10) << e.name;
      for (int i = 0; i < p.num_followers(); ++i) {
        const Vec grad_g = s.G[size_t(i)] * v + s.c[size_t(i)];
        EXPECT_LE((p.followers[size_t(i)].grad_own(x, y) -
                   grad_g.segment(s.y_begin(i), s.y_size(i)))
                      .norm(),
                  1e-12)
            << e.name;
        EXPECT_LE((p.followers[size_t(i)].grad_x(x, y) - grad_g.head(p.leader_dim)).norm(),
                  1e-12)
            << e.name;
        EXPECT_NEAR(p.followers[size_t(i)].value(x, y), s.follower_cost(i, v), 1e-10)
            << e.name;
      }
    }
  }
}

TEST(Catalog, DeclaredModulusIsExactMinimumEigenvalue) {
  for (const ProblemCatalogEntry& e : catalog()) {
    const Mat hy = e.spec->operator_block_y();
    const double min_eig =
        Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (hy + hy.transpose())).eigenvalues().minCoeff();
    EXPECT_NEAR(e.problem.constants.mu_g, min_eig, 1e-12) << e.name;
  }
}

TEST(SymmetricQuadratic, CouplingShapesTheEquilibrium) {
  const ProblemCatalogEntry& e = test::coupled_half();
  EXPECT_DOUBLE_EQ(e.problem.constants.mu_g, 0.5);
  const QuadraticOracle oracle(*e.spec);
  EXPECT_LT((oracle.followers_equilibrium(vec({1.0})) - vec({2.0 / 3.0, 2.0 / 3.0})).norm(),
            1e-13);
}

TEST(SymmetricQuadratic, ConstructionGates) {
  EXPECT_THROW(make_symmetric_quadratic(3, 0.6, Vec::Zero(1)), std::invalid_argument);
  EXPECT_THROW(make_symmetric_quadratic(0, 0.0, Vec::Zero(1)), std::invalid_argument);
  EXPECT_THROW(make_symmetric_quadratic(2, 0.0, Vec()), std::invalid_argument);
  EXPECT_NO_THROW(make_symmetric_quadratic(3, 0.45, Vec::Zero(2)));
}

TEST(SymmetricQuadratic, NegativeCouplingKeepsMonotonicity) {
  const ProblemCatalogEntry e = make_symmetric_quadratic(2, -0.4, Vec::Zero(1));
  // symmetric part eigenvalues are 1 - c and 1 + c(k-1)
  EXPECT_DOUBLE_EQ(e.problem.constants.mu_g, 0.6);
  EXPECT_TRUE(check_strong_monotonicity(e.problem, 100, 7).pass);
}

TEST(Cournot, SymmetricClosedFormEquilibrium) {
  const QuadraticOracle oracle(*test::cournot2().spec);
  // y_i = (a - c_i - x) / (b (k+1)) at a=10, b=1, c=1, x=1
  EXPECT_LT((oracle.followers_equilibrium(vec({1.0})) - vec({8.0 / 3.0, 8.0 / 3.0})).norm(),
            1e-12);
  // prohibitive tax x = a - c zeroes the margin
  EXPECT_LT(oracle.followers_equilibrium(vec({9.0})).norm(), 1e-12);
}

TEST(Cournot, SlopeScalesInverselyWithDemandSlope) {
  const ProblemCatalogEntry steep = make_cournot(2, 10.0, 2.0, 2.5);
  const QuadraticOracle oracle(*steep.spec);
  EXPECT_LT((oracle.followers_equilibrium(vec({1.0})) - vec({4.0 / 3.0, 4.0 / 3.0})).norm(),
            1e-12);
  EXPECT_DOUBLE_EQ(steep.problem.constants.mu_g, 2.0);  // mu_g = b
}

TEST(Cournot, CustomCostsAndTargets) {
  const Vec costs = vec({1.0, 4.0});
  const ProblemCatalogEntry e = make_cournot(2, 10.0, 1.0, 2.5, costs);
  const QuadraticOracle oracle(*e.spec);
  // asymmetric margins: solve (I + ones) y = a - c - x blockwise
  const Vec y = oracle.followers_equilibrium(vec({1.0}));
  // first-order conditions: 2 y_i + y_j = a - c_i - x
  EXPECT_NEAR(2.0 * y[0] + y[1], 8.0, 1e-12);
  EXPECT_NEAR(2.0 * y[1] + y[0], 5.0, 1e-12);
}

TEST(Cournot, ConstructionGates) {
  EXPECT_THROW(make_cournot(0, 10.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(make_cournot(2, -1.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(make_cournot(2, 10.0, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(make_cournot(2, 10.0, 1.0, -2.0), std::invalid_argument);
  EXPECT_THROW(make_cournot(2, 10.0, 1.0, 1.0, vec({1.0})), std::invalid_argument);
  EXPECT_THROW(make_cournot(2, 10.0, 1.0, 1.0, std::nullopt, vec({1.0, 2.0, 3.0})),
               std::invalid_argument);
}

TEST(ProblemFromSpec, WorkingRadiusCoversTheBoxes) {
  const StackelbergProblem& p = test::cournot2().problem;
  EXPECT_DOUBLE_EQ(p.working_radius, 20.0);  // follower box upper bound 2a/b
  ASSERT_TRUE(p.follower_box.has_value());
  EXPECT_DOUBLE_EQ(p.follower_box->upper[0], 20.0);
  EXPECT_DOUBLE_EQ(p.leader_box->upper[0], 10.0);
  EXPECT_DOUBLE_EQ(p.leader_box->lower[0], 0.0);
}

}  // namespace
}  // namespace stackgame
