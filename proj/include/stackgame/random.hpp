#pragma once

#include "stackgame/types.hpp"

#include <cstdint>
#include <random>

namespace stackgame {

/// Seeded generator with a fixed bits-to-double mapping so that streams are
/// reproducible across standard libraries (uniform_real_distribution is not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  Vec uniform_vec(int dim, double lo, double hi) {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = uniform(lo, hi);
    return v;
  }

  /// Uniform over a box, or over [-radius, radius]^dim when no box is given.
  Vec sample(int dim, const std::optional<Box>& box, double radius) {
    if (!box) return uniform_vec(dim, -radius, radius);
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = uniform(box->lower[i], box->upper[i]);
    return v;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace stackgame
