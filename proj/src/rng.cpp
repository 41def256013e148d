#include "terragan/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace terragan {

std::uint64_t Random::below(std::uint64_t bound) {
  if (bound == 0) return 0;
  const auto pick = static_cast<std::uint64_t>(uniform() * static_cast<double>(bound));
  return std::min(pick, bound - 1);
}

double Random::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

}  // namespace terragan
