#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "terragan/image.hpp"

namespace terragan {

struct MeshConfig {
  double horizontal_scale = 1000.0;  // meters per pixel
  double vertical_scale = 4000.0;    // meters at full intensity

  void validate() const;
};

/// Model-range value to 16-bit sample: round((v + 1) / 2 * 65535).
/// Throws InvalidInput outside [-1,1]; values are never clamped.
std::uint16_t quantize16(float v);
float dequantize16(std::uint16_t q);
std::uint8_t quantize8(float v);

/// Single-channel [-1,1] heightmap to a 16-bit grayscale PNG.
void write_heightmap_png16(const Image& heightmap, const std::filesystem::path& path);
/// Reads a 16-bit (or 8-bit) grayscale PNG back into model range.
Image read_heightmap_png16(const std::filesystem::path& path);

/// Three-channel [-1,1] texture to an 8-bit RGB PNG.
void write_texture_png(const Image& texture, const std::filesystem::path& path);
Image read_texture_png(const std::filesystem::path& path);

struct ExportReport {
  std::vector<std::string> warnings;
};

/// Headerless 16-bit little-endian samples, row-major from the top row.
ExportReport write_unity_raw(const Image& heightmap, const std::filesystem::path& path);

struct MeshStats {
  std::size_t vertices = 0;
  std::size_t faces = 0;
};

/// Vertex grid at (col * h, (v + 1) / 2 * vscale, row * h) with two
/// triangles per cell, wound counter-clockwise seen from +y.
MeshStats heightmap_to_obj(const Image& heightmap, const MeshConfig& config, const std::filesystem::path& path);

}  // namespace terragan
