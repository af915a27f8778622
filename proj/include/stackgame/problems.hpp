#pragma once

#include "stackgame/quadratic_oracle.hpp"

#include <cstdio>
#include <memory>

namespace stackgame {

/// Named built-in instance. All built-ins are affine-quadratic, so each entry
/// carries the exact-oracle spec its generic callbacks were generated from;
/// the two agree to machine precision by construction.
struct ProblemCatalogEntry {
  std::string name;
  std::string description;
  StackelbergProblem problem;
  std::optional<QuadraticGameSpec> spec;
};

/// Generic problem whose callbacks evaluate the quadratic spec directly.
/// Declared constants are derived over the joint box, so they are valid on
/// every iterate the projected solver can visit.
inline StackelbergProblem problem_from_spec(const QuadraticGameSpec& spec, Box leader_box,
                                            Box follower_box) {
  auto sp = std::make_shared<const QuadraticGameSpec>(spec);
  sp->validate();
  StackelbergProblem p;
  p.leader_dim = sp->leader_dim;
  p.layout = sp->layout;
  p.leader_box = std::move(leader_box);
  p.follower_box = std::move(follower_box);

  p.leader.value = [sp](const Vec& x, const Vec& y) { return sp->leader_cost(sp->joint(x, y)); };
  p.leader.grad_x = [sp](const Vec& x, const Vec& y) {
    return Vec((sp->Q * sp->joint(x, y) + sp->q).head(sp->leader_dim));
  };
  p.leader.grad_y = [sp](const Vec& x, const Vec& y) {
    return Vec((sp->Q * sp->joint(x, y) + sp->q).tail(sp->layout.total()));
  };
  for (int i = 0; i < static_cast<int>(sp->G.size()); ++i) {
    FollowerCost fc;
    fc.value = [sp, i](const Vec& x, const Vec& y) {
      return sp->follower_cost(i, sp->joint(x, y));
    };
    fc.grad_x = [sp, i](const Vec& x, const Vec& y) {
      const size_t s = static_cast<size_t>(i);
      return Vec((sp->G[s] * sp->joint(x, y) + sp->c[s]).head(sp->leader_dim));
    };
    fc.grad_own = [sp, i](const Vec& x, const Vec& y) {
      const size_t s = static_cast<size_t>(i);
      return Vec((sp->G[s] * sp->joint(x, y) + sp->c[s]).segment(sp->y_begin(i), sp->y_size(i)));
    };
    p.followers.push_back(std::move(fc));
  }

  Box joint{Vec(sp->joint_dim()), Vec(sp->joint_dim())};
  joint.lower << p.leader_box->lower, p.follower_box->lower;
  joint.upper << p.leader_box->upper, p.follower_box->upper;
  p.constants = QuadraticOracle(*sp).derive_constants(joint);
  p.working_radius = joint.upper.cwiseAbs().cwiseMax(joint.lower.cwiseAbs()).maxCoeff();
  p.validate();
  return p;
}

namespace detail {
inline Box uniform_box(int dim, double lo, double hi) {
  return Box{Vec::Constant(dim, lo), Vec::Constant(dim, hi)};
}

inline std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}
}  // namespace detail

/// Symmetric scalar-follower quadratic family. Leader pays 1/2||x - shift||^2
/// plus 1/2||y||^2; follower i tracks the sum of the leader coordinates with a
/// symmetric cross term: grad_{y_i} g_i = y_i + coupling * sum_{j != i} y_j - 1'x.
/// coupling = 0, shift = 0, k = 2 is the canonical two-follower instance used
/// all over the tests.
inline ProblemCatalogEntry make_symmetric_quadratic(int k, double coupling,
                                                    const Vec& leader_shift) {
  if (k < 1) throw std::invalid_argument("make_symmetric_quadratic: k must be positive");
  if (std::abs(coupling) * (k - 1) >= 1.0)
    throw std::invalid_argument(
        "make_symmetric_quadratic: |coupling|*(k-1) must stay below 1 for monotonicity");
  const int n0 = static_cast<int>(leader_shift.size());
  if (n0 < 1) throw std::invalid_argument("make_symmetric_quadratic: empty leader shift");
  const int n = n0 + k;

  QuadraticGameSpec spec;
  spec.leader_dim = n0;
  spec.layout = BlockLayout(std::vector<int>(static_cast<size_t>(k), 1));
  spec.Q = Mat::Identity(n, n);
  spec.q = Vec::Zero(n);
  spec.q.head(n0) = -leader_shift;
  spec.f_const = 0.5 * leader_shift.squaredNorm();
  for (int i = 0; i < k; ++i) {
    Mat g = Mat::Zero(n, n);
    g.topLeftCorner(n0, n0) = Mat::Ones(n0, n0);
    g.block(0, n0 + i, n0, 1) = -Vec::Ones(n0);
    g.block(n0 + i, 0, 1, n0) = -Vec::Ones(n0).transpose();
    g(n0 + i, n0 + i) = 1.0;
    for (int j = 0; j < k; ++j)
      if (j != i) g(n0 + i, n0 + j) = g(n0 + j, n0 + i) = coupling;
    spec.G.push_back(std::move(g));
    spec.c.push_back(Vec::Zero(n));
    spec.d.push_back(0.0);
  }

  ProblemCatalogEntry e;
  e.name = coupling == 0.0 ? (k == 2 && leader_shift.isZero() ? "sq2" : "quadratic")
                           : "coupled-" + detail::short_number(coupling);
  e.description = "symmetric quadratic, k=" + std::to_string(k) +
                  ", coupling=" + detail::short_number(coupling);
  e.problem = problem_from_spec(spec, detail::uniform_box(n0, -1.0, 1.0),
                                detail::uniform_box(k, -1.0, 1.0));
  e.spec = std::move(spec);
  return e;
}

/// Tax-setting Cournot market: followers pick quantities y_i at cost
/// (c_i + x) y_i against inverse demand a - b * sum y, the leader collects
/// x * sum y and pays a quadratic tracking penalty on quantities.
inline ProblemCatalogEntry make_cournot(int k, double a, double b, double tax_weight,
                                        std::optional<Vec> costs = std::nullopt,
                                        std::optional<Vec> y_target = std::nullopt) {
  if (k < 1 || a <= 0.0 || b <= 0.0 || tax_weight <= 0.0)
    throw std::invalid_argument("make_cournot: need k >= 1, a > 0, b > 0, tax_weight > 0");
  const Vec c = costs ? *costs : Vec::Ones(k);
  const Vec yt = y_target ? *y_target : Vec::Zero(k);
  if (c.size() != k || yt.size() != k)
    throw std::invalid_argument("make_cournot: costs and y_target must have k entries");
  const int n = 1 + k;

  QuadraticGameSpec spec;
  spec.leader_dim = 1;
  spec.layout = BlockLayout(std::vector<int>(static_cast<size_t>(k), 1));
  spec.Q = Mat::Zero(n, n);
  spec.Q.block(0, 1, 1, k).setConstant(-1.0);
  spec.Q.block(1, 0, k, 1).setConstant(-1.0);
  spec.Q.bottomRightCorner(k, k) = tax_weight * Mat::Identity(k, k);
  spec.q = Vec::Zero(n);
  spec.q.tail(k) = -tax_weight * yt;
  spec.f_const = 0.5 * tax_weight * yt.squaredNorm();
  for (int i = 0; i < k; ++i) {
    Mat g = Mat::Zero(n, n);
    g(0, 1 + i) = g(1 + i, 0) = 1.0;
    for (int j = 0; j < k; ++j) g(1 + i, 1 + j) = g(1 + j, 1 + i) = b;
    g(1 + i, 1 + i) = 2.0 * b;
    Vec lin = Vec::Zero(n);
    lin[1 + i] = c[i] - a;
    spec.G.push_back(std::move(g));
    spec.c.push_back(std::move(lin));
    spec.d.push_back(0.0);
  }

  ProblemCatalogEntry e;
  e.name = "cournot-k" + std::to_string(k);
  e.description = "tax-setting Cournot, k=" + std::to_string(k) +
                  ", a=" + detail::short_number(a) + ", b=" + detail::short_number(b);
  e.problem = problem_from_spec(spec, detail::uniform_box(1, 0.0, a),
                                detail::uniform_box(k, 0.0, 2.0 * a / b));
  e.spec = std::move(spec);
  return e;
}

/// Fixed built-in list: the canonical instance, three coupling levels, and two
/// Cournot parameterizations. Names are unique; every entry is validated at
/// construction.
inline std::vector<ProblemCatalogEntry> catalog() {
  std::vector<ProblemCatalogEntry> entries;
  entries.push_back(make_symmetric_quadratic(2, 0.0, Vec::Zero(1)));
  entries.push_back(make_symmetric_quadratic(2, 0.25, Vec::Zero(1)));
  entries.push_back(make_symmetric_quadratic(2, 0.5, Vec::Zero(1)));
  entries.push_back(make_symmetric_quadratic(2, 0.8, Vec::Zero(1)));
  entries.push_back(make_cournot(2, 10.0, 1.0, 2.5));
  entries.push_back(make_cournot(3, 12.0, 2.0, 3.0));
  return entries;
}

inline ProblemCatalogEntry find_problem(const std::string& name) {
  for (ProblemCatalogEntry& e : catalog())
    if (e.name == name) return std::move(e);
  std::string names;
  for (const ProblemCatalogEntry& e : catalog()) names += " " + e.name;
  throw std::invalid_argument("unknown problem '" + name + "'; available:" + names);
}

}  // namespace stackgame
