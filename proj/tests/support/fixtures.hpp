#pragma once

// Synthetic data and independent oracles shared by unit and acceptance tests.
// Nothing here calls into the library's numerical code paths, so these can
// serve as reference implementations.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <string>
#include <vector>

#include "terragan/data_pipeline.hpp"
#include "terragan/image.hpp"
#include "terragan/rng.hpp"

namespace terragan::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    Random r(static_cast<std::uint64_t>(std::hash<std::string>{}(tag)) ^
             static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count()));
    path_ = std::filesystem::temp_directory_path() / ("terragan_" + tag + "_" + std::to_string(r.below(1u << 30)));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::vector<char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Sum of 1-4 random Gaussian bumps on a 0.05 floor, clamped to 1.
inline Image gaussian_bump_terrain(int size, std::uint64_t seed) {
  Random rng(seed);
  const int bumps = 1 + static_cast<int>(rng.below(4));
  struct Bump {
    double cy, cx, sigma, height;
  };
  std::vector<Bump> params;
  for (int b = 0; b < bumps; ++b) {
    params.push_back({rng.uniform(0, size), rng.uniform(0, size), rng.uniform(0.1, 0.3) * size, rng.uniform(0.4, 1.0)});
  }
  Image img(size, size, 1);
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      double v = 0.05;
      for (const auto& p : params) {
        const double d2 = (r - p.cy) * (r - p.cy) + (c - p.cx) * (c - p.cx);
        v += p.height * std::exp(-d2 / (2 * p.sigma * p.sigma));
      }
      img.at(r, c) = static_cast<float>(std::min(1.0, v));
    }
  }
  return img;
}

/// Fixed piecewise-linear colormap: water blue, grass green, rock brown, snow.
inline std::array<float, 3> color_ramp(float h) {
  static constexpr std::array<float, 4> stops = {0.0f, 0.35f, 0.7f, 1.0f};
  static constexpr std::array<std::array<float, 3>, 4> colors = {
      {{0.10f, 0.20f, 0.60f}, {0.20f, 0.60f, 0.20f}, {0.50f, 0.35f, 0.20f}, {0.95f, 0.95f, 0.95f}}};
  h = std::clamp(h, 0.0f, 1.0f);
  std::size_t i = 0;
  while (i + 2 < stops.size() && h > stops[i + 1]) ++i;
  const float t = (h - stops[i]) / (stops[i + 1] - stops[i]);
  std::array<float, 3> out{};
  for (int k = 0; k < 3; ++k) out[k] = (1 - t) * colors[i][k] + t * colors[i + 1][k];
  return out;
}

/// Texture for a [0,1] heightmap under color_ramp.
inline Image ramp_texture(const Image& heightmap) {
  Image tex(heightmap.height, heightmap.width, 3);
  for (int r = 0; r < heightmap.height; ++r) {
    for (int c = 0; c < heightmap.width; ++c) {
      const auto rgb = color_ramp(heightmap.at(r, c));
      for (int k = 0; k < 3; ++k) tex.at(r, c, k) = rgb[k];
    }
  }
  return tex;
}

/// Random image with values uniform in [lo, hi).
inline Image random_image(int h, int w, int channels, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  Random rng(seed);
  Image img(h, w, channels);
  for (auto& v : img.data) v = static_cast<float>(rng.uniform(lo, hi));
  return img;
}

/// Dense 2-D Gaussian convolution with half-sample symmetric borders, built
/// straight from the definition (no separability, no shared kernel code).
inline Image dense_gaussian_oracle(const Image& img, double sigma) {
  if (sigma == 0.0) return img;
  const int half = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<std::vector<double>> kernel(2 * half + 1, std::vector<double>(2 * half + 1));
  double total = 0.0;
  for (int dy = -half; dy <= half; ++dy) {
    for (int dx = -half; dx <= half; ++dx) {
      const double w = std::exp(-(dy * dy + dx * dx) / (2.0 * sigma * sigma));
      kernel[dy + half][dx + half] = w;
      total += w;
    }
  }
  // Reflect about the pixel edge: index -1 maps to 0, n maps to n-1.
  auto reflect = [](int i, int n) {
    while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - i - 1;
    return i;
  };
  Image out(img.height, img.width, img.channels);
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      for (int k = 0; k < img.channels; ++k) {
        double acc = 0.0;
        for (int dy = -half; dy <= half; ++dy) {
          for (int dx = -half; dx <= half; ++dx) {
            acc += kernel[dy + half][dx + half] * img.at(reflect(r + dy, img.height), reflect(c + dx, img.width), k);
          }
        }
        out.at(r, c, k) = static_cast<float>(acc / total);
      }
    }
  }
  return out;
}

/// World rasters with blocky ocean: each 16x16 block of the heightmap is
/// either zero or uniform noise, so tiles span the whole black-fraction range.
inline WorldImagePair synthetic_world(int height, int width, std::uint64_t seed, double ocean_probability = 0.4) {
  Random rng(seed);
  WorldImagePair world;
  world.heightmap = Image(height, width, 1);
  world.texture = Image(height, width, 3);
  constexpr int kBlock = 16;
  const int block_cols = (width + kBlock - 1) / kBlock;
  std::vector<bool> ocean(static_cast<std::size_t>((height + kBlock - 1) / kBlock) * block_cols);
  for (std::size_t i = 0; i < ocean.size(); ++i) ocean[i] = rng.uniform() < ocean_probability;
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const bool water = ocean[static_cast<std::size_t>(r / kBlock) * block_cols + c / kBlock];
      world.heightmap.at(r, c) = water ? 0.0f : static_cast<float>(rng.uniform());
      for (int k = 0; k < 3; ++k) world.texture.at(r, c, k) = static_cast<float>(rng.uniform());
    }
  }
  return world;
}

inline double max_abs_diff(const Image& a, const Image& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::fabs(double(a.data[i]) - double(b.data[i])));
  return m;
}

inline double mean(const Image& img) {
  double s = 0.0;
  for (float v : img.data) s += v;
  return s / static_cast<double>(img.data.size());
}

}  // namespace terragan::testing
