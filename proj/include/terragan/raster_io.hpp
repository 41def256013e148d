#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "terragan/image.hpp"

namespace terragan {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raw integer samples of a PNG, interleaved, at its native bit depth (8 or 16).
struct PngSamples {
  int height = 0;
  int width = 0;
  int channels = 0;  // 1 (gray) or 3 (RGB); alpha is dropped, palettes expanded
  int bit_depth = 8;
  std::vector<std::uint16_t> samples;
};

PngSamples read_png_samples(const std::filesystem::path& path);

/// Writes gray (channels 1) or RGB (channels 3) samples. Output bytes depend
/// only on the samples, so identical inputs give identical files.
void write_png_samples(const std::filesystem::path& path, const PngSamples& png);

/// Reads a PNG (8/16-bit) or JPEG into [0,1] floats.
Image read_image(const std::filesystem::path& path);

/// Quantizes a [0,1] image as round(v * (2^bit_depth - 1)) and writes a PNG.
void write_image_png(const std::filesystem::path& path, const Image& image, int bit_depth);

}  // namespace terragan
