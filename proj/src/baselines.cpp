#include "terragan/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "terragan/rng.hpp"

namespace terragan {

void DiamondSquareConfig::validate() const {
  if (exponent < 1) throw InvalidInput("diamond_square: exponent must be >= 1");
  if (exponent > 14) throw InvalidInput("diamond_square: exponent too large");
  if (!(roughness >= 0.0) || !std::isfinite(roughness)) throw InvalidInput("diamond_square: roughness must be >= 0");
  for (double c : corner_values) {
    if (!std::isfinite(c)) throw InvalidInput("diamond_square: corner values must be finite");
  }
}

Image diamond_square(const DiamondSquareConfig& config) {
  config.validate();
  const int side = (1 << config.exponent) + 1;
  const int last = side - 1;
  std::vector<double> grid(static_cast<std::size_t>(side) * side, 0.0);
  auto cell = [&](int r, int c) -> double& { return grid[static_cast<std::size_t>(r) * side + c]; };

  cell(0, 0) = config.corner_values[0];
  cell(0, last) = config.corner_values[1];
  cell(last, 0) = config.corner_values[2];
  cell(last, last) = config.corner_values[3];

  Random rng(config.seed);
  double amplitude = config.roughness;
  for (int step = last; step > 1; step /= 2, amplitude *= 0.5) {
    const int half = step / 2;

    // diamond
    for (int r = half; r < side; r += step) {
      for (int c = half; c < side; c += step) {
        const double mean = 0.25 * (cell(r - half, c - half) + cell(r - half, c + half) +
                                    cell(r + half, c - half) + cell(r + half, c + half));
        cell(r, c) = mean + rng.uniform(-1.0, 1.0) * amplitude;
      }
    }

    // square: points with (r + c) / half odd
    for (int r = 0; r < side; r += half) {
      for (int c = (r / half) % 2 == 0 ? half : 0; c < side; c += step) {
        double sum = 0.0;
        int count = 0;
        if (r - half >= 0) sum += cell(r - half, c), ++count;
        if (r + half < side) sum += cell(r + half, c), ++count;
        if (c - half >= 0) sum += cell(r, c - half), ++count;
        if (c + half < side) sum += cell(r, c + half), ++count;
        cell(r, c) = sum / count + rng.uniform(-1.0, 1.0) * amplitude;
      }
    }
  }

  Image out(side, side, 1);
  for (std::size_t i = 0; i < grid.size(); ++i) out.data[i] = static_cast<float>(std::clamp(grid[i], 0.0, 1.0));
  return out;
}

}  // namespace terragan
