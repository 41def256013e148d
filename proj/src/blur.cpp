#include <cmath>
#include <vector>

#include "terragan/generation.hpp"

namespace terragan {
namespace {

// Half-sample symmetric reflection: -1 -> 0, n -> n-1, period 2n.
int mirror(int i, int n) {
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

}  // namespace

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidInput("gaussian_kernel: sigma must be positive");
  const int half = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> taps(static_cast<std::size_t>(half) + 1);
  double sum = 0.0;
  for (int i = 0; i <= half; ++i) {
    taps[i] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += i == 0 ? taps[i] : 2.0 * taps[i];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

Image gaussian_blur(const Image& image, double radius_px) {
  if (!(radius_px >= 0.0) || !std::isfinite(radius_px)) throw InvalidInput("gaussian_blur: radius must be >= 0");
  if (radius_px == 0.0 || image.empty()) return image;

  const auto taps = gaussian_kernel(radius_px);
  const int half = static_cast<int>(taps.size()) - 1;
  const int h = image.height;
  const int w = image.width;
  const int ch = image.channels;

  std::vector<double> horizontal(image.data.size());
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      for (int k = 0; k < ch; ++k) {
        double acc = taps[0] * image.at(r, c, k);
        for (int d = 1; d <= half; ++d) {
          acc += taps[d] * (static_cast<double>(image.at(r, mirror(c - d, w), k)) + image.at(r, mirror(c + d, w), k));
        }
        horizontal[(static_cast<std::size_t>(r) * w + c) * ch + k] = acc;
      }
    }
  }

  auto tmp = [&](int r, int c, int k) { return horizontal[(static_cast<std::size_t>(r) * w + c) * ch + k]; };
  Image out(h, w, ch);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      for (int k = 0; k < ch; ++k) {
        double acc = taps[0] * tmp(r, c, k);
        for (int d = 1; d <= half; ++d) acc += taps[d] * (tmp(mirror(r - d, h), c, k) + tmp(mirror(r + d, h), c, k));
        out.at(r, c, k) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

}  // namespace terragan
