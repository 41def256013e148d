#include "terragan/export.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "terragan/raster_io.hpp"

namespace terragan {
namespace {

void require_model_range(const Image& image, const char* what) {
  for (float v : image.data) {
    if (!(v >= -1.0f && v <= 1.0f)) throw InvalidInput(std::string(what) + ": value outside [-1,1]");
  }
}

void require_heightmap(const Image& heightmap, const char* what) {
  if (heightmap.channels != 1 || heightmap.empty()) {
    throw InvalidInput(std::string(what) + ": expected a non-empty single-channel heightmap");
  }
}

}  // namespace

void MeshConfig::validate() const {
  if (!(horizontal_scale > 0.0) || !(vertical_scale > 0.0)) throw InvalidInput("mesh scales must be positive");
}

std::uint16_t quantize16(float v) {
  if (!(v >= -1.0f && v <= 1.0f)) throw InvalidInput("quantize16: value outside [-1,1]");
  return static_cast<std::uint16_t>(std::lround((static_cast<double>(v) + 1.0) * 0.5 * 65535.0));
}

float dequantize16(std::uint16_t q) { return static_cast<float>(q / 65535.0 * 2.0 - 1.0); }

std::uint8_t quantize8(float v) {
  if (!(v >= -1.0f && v <= 1.0f)) throw InvalidInput("quantize8: value outside [-1,1]");
  return static_cast<std::uint8_t>(std::lround((static_cast<double>(v) + 1.0) * 0.5 * 255.0));
}

void write_heightmap_png16(const Image& heightmap, const std::filesystem::path& path) {
  require_heightmap(heightmap, "write_heightmap_png16");
  PngSamples png{heightmap.height, heightmap.width, 1, 16, {}};
  png.samples.reserve(heightmap.data.size());
  for (float v : heightmap.data) png.samples.push_back(quantize16(v));
  write_png_samples(path, png);
}

Image read_heightmap_png16(const std::filesystem::path& path) {
  const PngSamples png = read_png_samples(path);
  if (png.channels != 1) throw InvalidInput("heightmap PNG must be grayscale: " + path.string());
  const double maxval = png.bit_depth == 16 ? 65535.0 : 255.0;
  Image out(png.height, png.width, 1);
  for (std::size_t i = 0; i < png.samples.size(); ++i) {
    out.data[i] = static_cast<float>(png.samples[i] / maxval * 2.0 - 1.0);
  }
  return out;
}

void write_texture_png(const Image& texture, const std::filesystem::path& path) {
  if (texture.channels != 3 || texture.empty()) throw InvalidInput("write_texture_png: expected an RGB image");
  require_model_range(texture, "write_texture_png");
  PngSamples png{texture.height, texture.width, 3, 8, {}};
  png.samples.reserve(texture.data.size());
  for (float v : texture.data) png.samples.push_back(quantize8(v));
  write_png_samples(path, png);
}

Image read_texture_png(const std::filesystem::path& path) {
  const PngSamples png = read_png_samples(path);
  if (png.channels != 3) throw InvalidInput("texture PNG must be RGB: " + path.string());
  const double maxval = png.bit_depth == 16 ? 65535.0 : 255.0;
  Image out(png.height, png.width, 3);
  for (std::size_t i = 0; i < png.samples.size(); ++i) {
    out.data[i] = static_cast<float>(png.samples[i] / maxval * 2.0 - 1.0);
  }
  return out;
}

ExportReport write_unity_raw(const Image& heightmap, const std::filesystem::path& path) {
  require_heightmap(heightmap, "write_unity_raw");
  ExportReport report;
  if (heightmap.width != heightmap.height) {
    report.warnings.push_back("heightmap is " + std::to_string(heightmap.width) + "x" +
                              std::to_string(heightmap.height) + "; engines usually expect square terrain");
  }
  std::vector<unsigned char> bytes;
  bytes.reserve(heightmap.data.size() * 2);
  for (float v : heightmap.data) {
    const std::uint16_t q = quantize16(v);
    bytes.push_back(static_cast<unsigned char>(q & 0xff));
    bytes.push_back(static_cast<unsigned char>(q >> 8));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
  return report;
}

MeshStats heightmap_to_obj(const Image& heightmap, const MeshConfig& config, const std::filesystem::path& path) {
  require_heightmap(heightmap, "heightmap_to_obj");
  config.validate();
  if (heightmap.width < 2 || heightmap.height < 2) throw InvalidInput("heightmap_to_obj: need at least 2x2 samples");
  require_model_range(heightmap, "heightmap_to_obj");

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());

  const int w = heightmap.width;
  const int h = heightmap.height;
  char line[128];
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const double height_m = (static_cast<double>(heightmap.at(r, c)) + 1.0) * 0.5 * config.vertical_scale;
      std::snprintf(line, sizeof(line), "v %.6f %.6f %.6f\n", c * config.horizontal_scale, height_m,
                    r * config.horizontal_scale);
      out << line;
    }
  }
  auto index = [w](int r, int c) { return static_cast<long long>(r) * w + c + 1; };
  for (int r = 0; r + 1 < h; ++r) {
    for (int c = 0; c + 1 < w; ++c) {
      std::snprintf(line, sizeof(line), "f %lld %lld %lld\nf %lld %lld %lld\n", index(r, c), index(r + 1, c),
                    index(r, c + 1), index(r, c + 1), index(r + 1, c), index(r + 1, c + 1));
      out << line;
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
  return {static_cast<std::size_t>(w) * h, 2 * static_cast<std::size_t>(w - 1) * (h - 1)};
}

}  // namespace terragan
