#pragma once

#include <Eigen/Core>

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stackgame {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Inner loop exceeded its hard iteration cap without reaching tolerance.
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Non-finite value produced by an oracle or an update; carries the offending iterate.
struct NumericError : std::runtime_error {
  NumericError(const std::string& what, Vec iterate_)
      : std::runtime_error(what), iterate(std::move(iterate_)) {}
  Vec iterate;
};

/// Block structure of the stacked follower vector y = (y_1, ..., y_k).
class BlockLayout {
 public:
  BlockLayout() = default;
  explicit BlockLayout(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    offsets_.reserve(sizes_.size());
    for (int n : sizes_) {
      if (n <= 0) throw std::invalid_argument("BlockLayout: block sizes must be positive");
      offsets_.push_back(total_);
      total_ += n;
    }
  }

  int blocks() const { return static_cast<int>(sizes_.size()); }
  int total() const { return total_; }
  int size(int i) const { return sizes_.at(i); }
  int offset(int i) const { return offsets_.at(i); }

  Eigen::Ref<const Vec> segment(const Vec& y, int i) const {
    return y.segment(offset(i), size(i));
  }
  Eigen::Ref<Vec> segment(Vec& y, int i) const { return y.segment(offset(i), size(i)); }

  /// y with block i replaced by the corresponding block of src.
  Vec with_block(const Vec& y, int i, const Vec& src) const {
    Vec out = y;
    out.segment(offset(i), size(i)) = src.segment(offset(i), size(i));
    return out;
  }

  bool operator==(const BlockLayout& o) const { return sizes_ == o.sizes_; }

 private:
  std::vector<int> sizes_;
  std::vector<int> offsets_;
  int total_ = 0;
};

/// Axis-aligned box; both bounds required, entrywise lower <= upper.
struct Box {
  Vec lower;
  Vec upper;

  void validate(int dim) const {
    if (lower.size() != dim || upper.size() != dim)
      throw std::invalid_argument("Box: bound dimensions do not match variable dimension");
    for (int i = 0; i < dim; ++i)
      if (!(lower[i] <= upper[i]))
        throw std::invalid_argument("Box: lower bound exceeds upper bound");
  }
};

/// Euclidean projection; identity when no box is present.
inline Vec project(Vec v, const std::optional<Box>& box) {
  if (box) v = v.cwiseMax(box->lower).cwiseMin(box->upper);
  return v;
}

/// Smoothness and monotonicity constants declared for a problem instance.
/// mu_g:   strong monotonicity modulus of the followers' gradient operator.
/// ell_f0: bound on ||grad_x f|| and on each block ||grad_{y_i} f|| over the working region.
/// ell_f1: joint smoothness of f.
/// ell_g0: bound on ||grad_x g_i|| over the working region.
/// ell_g1: joint smoothness of every g_i (also dominates the stacked operator Jacobian).
/// ell_g2: Lipschitz modulus of the g_i Hessians (0 for quadratic families).
struct SmoothnessConstants {
  double mu_g = 0.0;
  double ell_f0 = 0.0;
  double ell_f1 = 0.0;
  double ell_g0 = 0.0;
  double ell_g1 = 0.0;
  double ell_g2 = 0.0;

  // Declared values are trusted, not cross-checked: a deliberately wrong
  // declaration (say an inflated mu_g) must still run so the bound suites can
  // catch it. Consistency with the instance is the sampled checks' job.
  void validate() const {
    if (!(mu_g > 0.0)) throw std::invalid_argument("constants: mu_g must be positive");
    if (ell_f0 < 0.0 || ell_f1 < 0.0 || ell_g0 < 0.0 || ell_g1 < 0.0 || ell_g2 < 0.0)
      throw std::invalid_argument("constants: negative smoothness bound");
  }
};

/// Leader decision paired with the stacked follower profile.
struct JointPoint {
  Vec x;
  Vec y;
};

}  // namespace stackgame
