#pragma once

#include "stackgame/outer_loop.hpp"

#include <Eigen/Dense>

namespace stackgame {

/// Full quadratic game data over the joint variable v = (x, y). Leader cost
/// f(v) = v'Qv/2 + q'v + f_const, follower i cost g_i(v) = v'G_i v/2 + c_i'v + d_i.
/// The first-order operator data (H_x, H_y, b) is derived, never stored, so the
/// closed forms below and any generic problem built on top of this spec agree
/// to machine precision by construction.
struct QuadraticGameSpec {
  int leader_dim = 0;
  BlockLayout layout;
  Mat Q;  // (n0+m) x (n0+m), symmetric
  Vec q;
  double f_const = 0.0;
  std::vector<Mat> G;  // per follower, (n0+m) x (n0+m), symmetric
  std::vector<Vec> c;
  std::vector<double> d;

  int joint_dim() const { return leader_dim + layout.total(); }

  void validate() const {
    const int n = joint_dim();
    if (leader_dim <= 0 || layout.total() <= 0)
      throw std::invalid_argument("QuadraticGameSpec: empty leader or follower space");
    if (Q.rows() != n || Q.cols() != n || q.size() != n)
      throw std::invalid_argument("QuadraticGameSpec: leader quadratic has wrong size");
    if (!Q.isApprox(Q.transpose(), 1e-12))
      throw std::invalid_argument("QuadraticGameSpec: Q must be symmetric");
    if (static_cast<int>(G.size()) != layout.blocks() || c.size() != G.size() ||
        d.size() != G.size())
      throw std::invalid_argument("QuadraticGameSpec: follower count mismatch");
    for (size_t i = 0; i < G.size(); ++i) {
      if (G[i].rows() != n || G[i].cols() != n || c[i].size() != n)
        throw std::invalid_argument("QuadraticGameSpec: follower quadratic has wrong size");
      if (!G[i].isApprox(G[i].transpose(), 1e-12))
        throw std::invalid_argument("QuadraticGameSpec: G must be symmetric");
    }
  }

  // Row/column spans of x and of follower block i inside v.
  int x_begin() const { return 0; }
  int y_begin(int i) const { return leader_dim + layout.offset(i); }
  int y_size(int i) const { return layout.size(i); }

  Vec joint(const Vec& x, const Vec& y) const {
    Vec v(joint_dim());
    v << x, y;
    return v;
  }

  double leader_cost(const Vec& v) const { return 0.5 * v.dot(Q * v) + q.dot(v) + f_const; }
  double follower_cost(int i, const Vec& v) const {
    const size_t s = static_cast<size_t>(i);
    return 0.5 * v.dot(G[s] * v) + c[s].dot(v) + d[s];
  }

  /// Stacked-gradient operator as an affine map: V(x, y) = Hx * x + Hy * y + b.
  Mat operator_block_x() const {
    const int m = layout.total();
    Mat hx(m, leader_dim);
    for (int i = 0; i < static_cast<int>(G.size()); ++i)
      hx.middleRows(y_begin(i) - leader_dim, y_size(i)) =
          G[static_cast<size_t>(i)].block(y_begin(i), 0, y_size(i), leader_dim);
    return hx;
  }
  Mat operator_block_y() const {
    const int m = layout.total();
    Mat hy(m, m);
    for (int i = 0; i < static_cast<int>(G.size()); ++i)
      hy.middleRows(y_begin(i) - leader_dim, y_size(i)) =
          G[static_cast<size_t>(i)].block(y_begin(i), leader_dim, y_size(i), m);
    return hy;
  }
  Vec operator_offset() const {
    Vec b(layout.total());
    for (int i = 0; i < static_cast<int>(G.size()); ++i)
      b.segment(y_begin(i) - leader_dim, y_size(i)) =
          c[static_cast<size_t>(i)].segment(y_begin(i), y_size(i));
    return b;
  }
};

/// Central finite difference with per-coordinate step h_j = cbrt(eps) * max(1, |x_j|).
inline Vec fd_gradient(const std::function<double(const Vec&)>& fn, const Vec& x) {
  const double base = std::cbrt(std::numeric_limits<double>::epsilon());
  Vec g(x.size());
  Vec xp = x, xm = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = base * std::max(1.0, std::abs(x[j]));
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    g[j] = (fn(xp) - fn(xm)) / (xp[j] - xm[j]);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return g;
}

struct LemmaCheck {
  std::string name;
  double worst_ratio = 0.0;  // measured / bound, maximized over the probe set
  bool pass = false;
};

/// Closed-form reference solver for QuadraticGameSpec instances. Everything
/// here is allowed to use direct linear algebra; the first-order solver path
/// never includes this header.
class QuadraticOracle {
 public:
  explicit QuadraticOracle(QuadraticGameSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    hx_ = spec_.operator_block_x();
    hy_ = spec_.operator_block_y();
    b_ = spec_.operator_offset();
    hy_lu_.compute(hy_);
    if (std::abs(hy_lu_.determinant()) < 1e-12)
      throw std::invalid_argument("QuadraticOracle: followers' system is singular");
    jac_ = -hy_lu_.solve(hx_);
    const int n0 = spec_.leader_dim;
    const int m = spec_.layout.total();
    q_xx_ = spec_.Q.topLeftCorner(n0, n0);
    q_xy_ = spec_.Q.topRightCorner(n0, m);
    q_yy_ = spec_.Q.bottomRightCorner(m, m);
    q_x_ = spec_.q.head(n0);
    q_y_ = spec_.q.tail(m);
  }

  const QuadraticGameSpec& spec() const { return spec_; }
  const Mat& implicit_jacobian() const { return jac_; }

  Vec followers_equilibrium(const Vec& x) const { return -hy_lu_.solve(hx_ * x + b_); }

  Vec true_gradient(const Vec& x) const {
    const Vec v = spec_.joint(x, followers_equilibrium(x));
    const Vec grad = spec_.Q * v + spec_.q;
    return grad.head(spec_.leader_dim) + jac_.transpose() * grad.tail(spec_.layout.total());
  }

  double leader_value(const Vec& x) const {
    return spec_.leader_cost(spec_.joint(x, followers_equilibrium(x)));
  }

  /// Unconstrained minimizer of x -> f(x, y*(x)) and its value. Requires the
  /// reduced Hessian to be positive definite, which every catalog instance is.
  JointPoint stackelberg_point() const {
    const int n0 = spec_.leader_dim;
    const int m = spec_.layout.total();
    Mat t(n0 + m, n0);
    t.topRows(n0) = Mat::Identity(n0, n0);
    t.bottomRows(m) = jac_;
    Vec u = Vec::Zero(n0 + m);
    u.tail(m) = -hy_lu_.solve(b_);
    const Mat h = t.transpose() * spec_.Q * t;
    const Vec g = t.transpose() * (spec_.Q * u + spec_.q);
    Eigen::LLT<Mat> llt(h);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("QuadraticOracle: reduced leader Hessian is not PD");
    const Vec xs = llt.solve(-g);
    return {xs, followers_equilibrium(xs)};
  }

  double optimal_value() const { return leader_value(stackelberg_point().x); }

  /// Minimizer over y of f(x,y) + lambda * sum_i g_i(x, y_i, y*_{-i}(x)), the
  /// ideal inner target the surrogate descends toward.
  Vec lagrangian_minimizer(double lambda, const Vec& x) const {
    const Mat diag = own_block_diagonal();
    const Vec ys = followers_equilibrium(x);
    const Mat h = q_yy_ + lambda * diag;
    // The convexity threshold 2 ell_f1 / mu_g is sufficient, not necessary;
    // gate on the exact condition so small-lambda probes still work.
    Eigen::LLT<Mat> llt(0.5 * (h + h.transpose()));
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument(
          "lagrangian_minimizer: penalized objective is not convex at this lambda");
    const Vec rhs = -(q_xy_.transpose() * x + q_y_ + lambda * (hx_ * x + b_) +
                      lambda * (hy_ - diag) * ys);
    return llt.solve(rhs);
  }

  /// x-gradient of the penalized surrogate with both inner problems solved
  /// exactly: y = y*_lambda(x), frozen z = y*(x). This is the quantity the
  /// algorithm's leader step estimates.
  Vec penalized_x_gradient(double lambda, const Vec& x) const {
    const Vec ys = followers_equilibrium(x);
    const Vec yl = lagrangian_minimizer(lambda, x);
    const Vec v_star = spec_.joint(x, ys);
    Vec g = q_xx_ * x + q_xy_ * yl + q_x_;
    for (int i = 0; i < static_cast<int>(spec_.G.size()); ++i) {
      const Vec v_mix = spec_.joint(x, spec_.layout.with_block(ys, i, yl));
      const size_t s = static_cast<size_t>(i);
      const Vec dm = spec_.G[s] * v_mix + spec_.c[s];
      const Vec ds = spec_.G[s] * v_star + spec_.c[s];
      g += lambda * (dm.head(spec_.leader_dim) - ds.head(spec_.leader_dim));
    }
    return g;
  }

  /// Total x-derivative of min_y [f(x,y) + lambda * sum_i g_i(x, y_i, y*_{-i}(x))],
  /// i.e. penalized_x_gradient plus the terms flowing through y*(x). The gap
  /// between the two is exactly the bias the frozen-anchor step carries on
  /// cross-coupled games.
  Vec penalized_total_gradient(double lambda, const Vec& x) const {
    Vec g = penalized_x_gradient(lambda, x);
    const Vec ys = followers_equilibrium(x);
    const Vec yl = lagrangian_minimizer(lambda, x);
    const Vec v_star = spec_.joint(x, ys);
    const int n0 = spec_.leader_dim;
    const int m = spec_.layout.total();
    for (int i = 0; i < static_cast<int>(spec_.G.size()); ++i) {
      const Vec v_mix = spec_.joint(x, spec_.layout.with_block(ys, i, yl));
      const size_t s = static_cast<size_t>(i);
      Vec dy = (spec_.G[s] * v_mix + spec_.c[s]).tail(m) -
               (spec_.G[s] * v_star + spec_.c[s]).tail(m);
      // Own-block derivative of g_i vanishes at y* and must not enter the
      // channel sum at the mixed point either.
      dy.segment(spec_.y_begin(i) - n0, spec_.y_size(i)).setZero();
      g += lambda * (jac_.transpose() * dy);
    }
    return g;
  }

  /// Smoothness and monotonicity constants valid on the joint box region,
  /// with mu_g exact for this instance. The gradient-magnitude constants are
  /// per-block suprema (leader block and each follower block separately),
  /// taken over the box corners, where the convex maxima are attained.
  SmoothnessConstants derive_constants(const Box& joint_region) const {
    joint_region.validate(spec_.joint_dim());
    if (spec_.joint_dim() > 24)
      throw std::invalid_argument("derive_constants: corner enumeration too large");
    SmoothnessConstants out;
    const Mat sym = 0.5 * (hy_ + hy_.transpose());
    out.mu_g = Eigen::SelfAdjointEigenSolver<Mat>(sym).eigenvalues().minCoeff();
    if (out.mu_g <= 0.0)
      throw std::invalid_argument("QuadraticOracle: operator is not strongly monotone");
    Mat joint_op(hx_.rows(), spec_.joint_dim());
    joint_op << hx_, hy_;
    out.ell_f1 = spectral_norm(spec_.Q);
    out.ell_g1 = spectral_norm(joint_op);
    for (const Mat& gi : spec_.G) out.ell_g1 = std::max(out.ell_g1, spectral_norm(gi));
    out.ell_g2 = 0.0;
    out.ell_f0 = 0.0;
    out.ell_g0 = 0.0;
    const int d = spec_.joint_dim();
    Vec v(d);
    for (long mask = 0; mask < (1L << d); ++mask) {
      for (int j = 0; j < d; ++j)
        v[j] = (mask >> j) & 1 ? joint_region.upper[j] : joint_region.lower[j];
      out.ell_f0 = std::max(out.ell_f0, max_block_norm(spec_.Q * v + spec_.q));
      for (size_t i = 0; i < spec_.G.size(); ++i)
        out.ell_g0 = std::max(out.ell_g0, max_block_norm(spec_.G[i] * v + spec_.c[i]));
    }
    out.validate();
    return out;
  }

  /// Ratio certificates for the closed-form bounds the error decomposition
  /// leans on, probed at the given leader points and penalty weights.
  std::vector<LemmaCheck> verify_lemma_bounds(const SmoothnessConstants& c,
                                              const std::vector<Vec>& xs,
                                              const std::vector<double>& lambdas) const {
    const int k = static_cast<int>(spec_.G.size());
    const double c_lam = penalty_gap_constant(c, k);
    LemmaCheck gap{"penalty_minimizer_gap", 0.0, false};       // ||y*_l - y*|| vs 2 ell_f0/(l mu_g)
    LemmaCheck grad{"penalized_gradient_error", 0.0, false};   // ||grad F - grad L*_l|| vs k C/l
    LemmaCheck lip{"minimizer_x_lipschitz", 0.0, false};       // y*_l Lipschitz vs ell_l/mu_l
    LemmaCheck eq_lip{"equilibrium_x_lipschitz", 0.0, false};  // ||J|| vs ell_g1/mu_g
    LemmaCheck convex{"surrogate_strong_convexity", 0.0, false};  // min eig vs mu_g l / 2
    eq_lip.worst_ratio = spectral_norm(jac_) * c.mu_g / c.ell_g1;
    for (double lam : lambdas) {
      const PenaltyState ps = make_penalty_state(c, k, lam);
      const Mat h = q_yy_ + lam * own_block_diagonal();
      const double min_eig = Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (h + h.transpose()))
                                 .eigenvalues()
                                 .minCoeff();
      convex.worst_ratio = std::max(convex.worst_ratio, ps.mu_l / min_eig);
      for (size_t a = 0; a < xs.size(); ++a) {
        const Vec yl = lagrangian_minimizer(lam, xs[a]);
        const Vec ys = followers_equilibrium(xs[a]);
        gap.worst_ratio = std::max(gap.worst_ratio,
                                   (yl - ys).norm() * lam * c.mu_g / (2.0 * c.ell_f0));
        // The bound governs the exact value-function gradient. The frozen-anchor
        // x-gradient the algorithm sees differs by the channel terms and is not
        // bounded this way on cross-coupled games.
        const double err = (true_gradient(xs[a]) - penalized_total_gradient(lam, xs[a])).norm();
        grad.worst_ratio = std::max(grad.worst_ratio, err * lam / (k * c_lam));
        for (size_t b = a + 1; b < xs.size(); ++b) {
          const double dx = (xs[a] - xs[b]).norm();
          if (dx < 1e-12) continue;
          const double dy = (yl - lagrangian_minimizer(lam, xs[b])).norm();
          lip.worst_ratio = std::max(lip.worst_ratio, dy / dx * ps.mu_l / ps.ell_l);
        }
      }
    }
    std::vector<LemmaCheck> out{gap, grad, lip, eq_lip, convex};
    for (LemmaCheck& lc : out) lc.pass = lc.worst_ratio <= 1.0 + 1e-9;
    return out;
  }

  CertificationHooks make_certification_hooks() const {
    CertificationHooks h;
    h.true_gradient = [this](const Vec& x) { return true_gradient(x); };
    h.followers_equilibrium = [this](const Vec& x) { return followers_equilibrium(x); };
    h.lagrangian_minimizer = [this](double lam, const Vec& x) {
      return lagrangian_minimizer(lam, x);
    };
    h.leader_value = [this](const Vec& x) { return leader_value(x); };
    h.optimal_value = [this]() { return optimal_value(); };
    return h;
  }

  static double spectral_norm(const Mat& m) {
    return m.jacobiSvd().singularValues()(0);
  }

 private:
  // Largest block norm of a joint-space gradient: leader block vs each y_i.
  double max_block_norm(const Vec& g) const {
    double m = g.head(spec_.leader_dim).norm();
    for (int i = 0; i < static_cast<int>(spec_.G.size()); ++i)
      m = std::max(m, g.segment(spec_.y_begin(i), spec_.y_size(i)).norm());
    return m;
  }

  Mat own_block_diagonal() const {
    const int m = spec_.layout.total();
    Mat diag = Mat::Zero(m, m);
    for (int i = 0; i < static_cast<int>(spec_.G.size()); ++i) {
      const int off = spec_.y_begin(i) - spec_.leader_dim;
      diag.block(off, off, spec_.y_size(i), spec_.y_size(i)) =
          hy_.block(off, off, spec_.y_size(i), spec_.y_size(i));
    }
    return diag;
  }

  QuadraticGameSpec spec_;
  Mat hx_, hy_, jac_;
  Vec b_;
  Eigen::PartialPivLU<Mat> hy_lu_;
  Mat q_xx_, q_xy_, q_yy_;
  Vec q_x_, q_y_;
};

}  // namespace stackgame
