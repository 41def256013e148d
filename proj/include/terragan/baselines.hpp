#pragma once

#include <array>
#include <cstdint>

#include "terragan/image.hpp"

namespace terragan {

struct DiamondSquareConfig {
  int exponent = 5;  // grid side is 2^exponent + 1
  double roughness = 0.5;
  // top-left, top-right, bottom-left, bottom-right
  std::array<double, 4> corner_values = {0.5, 0.5, 0.5, 0.5};
  std::uint64_t seed = 0;

  void validate() const;
};

/// Classic midpoint displacement on a (2^n+1)^2 grid, clamped to [0,1].
///
/// Level L (starting at 0) displaces by uniform noise in [-1,1] scaled by
/// roughness * 2^-L. Diamond centres take the mean of their four corners;
/// square (edge) midpoints take the mean of the neighbours that exist, so
/// border midpoints average three values. No wraparound.
Image diamond_square(const DiamondSquareConfig& config);

}  // namespace terragan
