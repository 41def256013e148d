#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace terragan {

/// Malformed arguments: wrong shapes, out-of-range values, inconsistent specs.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense float image, row-major with interleaved channels (HWC).
///
/// Two value conventions are used throughout the library: rasters and dataset
/// crops live in [0,1], network inputs/outputs live in model range [-1,1].
/// The type itself does not enforce either.
struct Image {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> data;

  Image() = default;
  Image(int height, int width, int channels, float fill = 0.0f);

  [[nodiscard]] bool empty() const noexcept { return data.empty(); }
  [[nodiscard]] std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
  [[nodiscard]] bool same_shape(const Image& other) const noexcept {
    return height == other.height && width == other.width && channels == other.channels;
  }

  [[nodiscard]] float& at(int row, int col, int ch = 0) {
    return data[(static_cast<std::size_t>(row) * width + col) * channels + ch];
  }
  [[nodiscard]] float at(int row, int col, int ch = 0) const {
    return data[(static_cast<std::size_t>(row) * width + col) * channels + ch];
  }

  /// Copy of the window [row, row+h) x [col, col+w). The window must fit.
  [[nodiscard]] Image crop(int row, int col, int h, int w) const;
};

/// Maps [0,1] to [-1,1] via v -> 2v - 1. Throws InvalidInput outside [0,1].
Image to_model_range(const Image& image);
/// Inverse of to_model_range. Throws InvalidInput outside [-1,1].
Image from_model_range(const Image& image);

/// Averages channels into a single-channel image.
Image to_grayscale(const Image& image);

/// Resamples to a square resolution: box filter when the size divides evenly,
/// bilinear otherwise.
Image resize(const Image& image, int height, int width);

/// 64-bit FNV-1a over raw bytes, rendered as "fnv1a64:<16 hex digits>".
std::string fnv1a64_hex(std::span<const std::byte> bytes);
std::string checksum(const Image& image);

}  // namespace terragan
