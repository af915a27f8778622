#pragma once

#include "stackgame/types.hpp"

#include <functional>

namespace stackgame {

/// Leader objective f(x, y) with first-order oracles. grad_y returns the full
/// stacked gradient; callers slice blocks through the problem layout.
struct LeaderObjective {
  std::function<double(const Vec& x, const Vec& y)> value;
  std::function<Vec(const Vec& x, const Vec& y)> grad_x;
  std::function<Vec(const Vec& x, const Vec& y)> grad_y;
};

/// Follower i's cost g_i(x, y) with first-order oracles. grad_own is the
/// gradient in the follower's own block only.
struct FollowerCost {
  std::function<double(const Vec& x, const Vec& y)> value;
  std::function<Vec(const Vec& x, const Vec& y)> grad_x;
  std::function<Vec(const Vec& x, const Vec& y)> grad_own;
};

/// One leader, k followers, optional box domains, declared constants.
struct StackelbergProblem {
  LeaderObjective leader;
  std::vector<FollowerCost> followers;
  int leader_dim = 0;
  BlockLayout layout;  // follower blocks
  std::optional<Box> leader_box;
  std::optional<Box> follower_box;
  SmoothnessConstants constants;
  // Constants above hold on the box domain when present, else on
  // [-working_radius, working_radius] per coordinate.
  double working_radius = 1.0;

  int num_followers() const { return static_cast<int>(followers.size()); }

  void validate() const {
    if (leader_dim <= 0) throw std::invalid_argument("problem: leader_dim must be positive");
    if (followers.empty()) throw std::invalid_argument("problem: needs at least one follower");
    if (layout.blocks() != num_followers())
      throw std::invalid_argument("problem: layout blocks != follower count");
    if (!leader.value || !leader.grad_x || !leader.grad_y)
      throw std::invalid_argument("problem: leader oracle incomplete");
    for (const auto& f : followers)
      if (!f.value || !f.grad_x || !f.grad_own)
        throw std::invalid_argument("problem: follower oracle incomplete");
    if (leader_box) leader_box->validate(leader_dim);
    if (follower_box) follower_box->validate(layout.total());
    if (!(working_radius > 0.0))
      throw std::invalid_argument("problem: working_radius must be positive");
    constants.validate();
  }
};

}  // namespace stackgame
