#include "terragan/image.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>

namespace terragan {

Image::Image(int h, int w, int c, float fill) : height(h), width(w), channels(c) {
  if (h < 0 || w < 0 || c < 0) throw InvalidInput("image dimensions must be non-negative");
  data.assign(static_cast<std::size_t>(h) * w * c, fill);
}

Image Image::crop(int row, int col, int h, int w) const {
  if (row < 0 || col < 0 || h < 0 || w < 0 || row + h > height || col + w > width) {
    throw InvalidInput("crop window does not fit inside the image");
  }
  Image out(h, w, channels);
  const std::size_t row_len = static_cast<std::size_t>(w) * channels;
  for (int r = 0; r < h; ++r) {
    const float* src = &data[(static_cast<std::size_t>(row + r) * width + col) * channels];
    std::copy_n(src, row_len, &out.data[static_cast<std::size_t>(r) * row_len]);
  }
  return out;
}

Image to_model_range(const Image& image) {
  Image out = image;
  for (float& v : out.data) {
    if (!(v >= 0.0f && v <= 1.0f)) throw InvalidInput("to_model_range: value outside [0,1]");
    v = 2.0f * v - 1.0f;
  }
  return out;
}

Image from_model_range(const Image& image) {
  Image out = image;
  for (float& v : out.data) {
    if (!(v >= -1.0f && v <= 1.0f)) throw InvalidInput("from_model_range: value outside [-1,1]");
    v = (v + 1.0f) * 0.5f;
  }
  return out;
}

Image to_grayscale(const Image& image) {
  if (image.channels == 1) return image;
  Image out(image.height, image.width, 1);
  const auto n = image.pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int c = 0; c < image.channels; ++c) sum += image.data[i * image.channels + c];
    out.data[i] = static_cast<float>(sum / image.channels);
  }
  return out;
}

Image resize(const Image& image, int height, int width) {
  if (height < 1 || width < 1) throw InvalidInput("resize: target size must be positive");
  if (image.empty()) throw InvalidInput("resize: empty image");
  if (height == image.height && width == image.width) return image;

  Image out(height, width, image.channels);
  if (image.height % height == 0 && image.width % width == 0) {
    const int fy = image.height / height;
    const int fx = image.width / width;
    const double norm = 1.0 / (static_cast<double>(fy) * fx);
    for (int r = 0; r < height; ++r) {
      for (int c = 0; c < width; ++c) {
        for (int ch = 0; ch < image.channels; ++ch) {
          double sum = 0.0;
          for (int dy = 0; dy < fy; ++dy) {
            for (int dx = 0; dx < fx; ++dx) sum += image.at(r * fy + dy, c * fx + dx, ch);
          }
          out.at(r, c, ch) = static_cast<float>(sum * norm);
        }
      }
    }
    return out;
  }

  const double sy = static_cast<double>(image.height) / height;
  const double sx = static_cast<double>(image.width) / width;
  for (int r = 0; r < height; ++r) {
    const double y = std::clamp((r + 0.5) * sy - 0.5, 0.0, image.height - 1.0);
    const int y0 = static_cast<int>(y);
    const int y1 = std::min(y0 + 1, image.height - 1);
    const double wy = y - y0;
    for (int c = 0; c < width; ++c) {
      const double x = std::clamp((c + 0.5) * sx - 0.5, 0.0, image.width - 1.0);
      const int x0 = static_cast<int>(x);
      const int x1 = std::min(x0 + 1, image.width - 1);
      const double wx = x - x0;
      for (int ch = 0; ch < image.channels; ++ch) {
        const double top = image.at(y0, x0, ch) * (1.0 - wx) + image.at(y0, x1, ch) * wx;
        const double bottom = image.at(y1, x0, ch) * (1.0 - wx) + image.at(y1, x1, ch) * wx;
        out.at(r, c, ch) = static_cast<float>(top * (1.0 - wy) + bottom * wy);
      }
    }
  }
  return out;
}

std::string fnv1a64_hex(std::span<const std::byte> bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (std::byte b : bytes) {
    hash ^= static_cast<std::uint64_t>(b);
    hash *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::string checksum(const Image& image) {
  static_assert(std::endian::native == std::endian::little, "checksums assume little-endian floats");
  std::vector<std::byte> bytes(3 * sizeof(std::int32_t) + image.data.size() * sizeof(float));
  const std::int32_t dims[3] = {image.height, image.width, image.channels};
  std::memcpy(bytes.data(), dims, sizeof(dims));
  std::memcpy(bytes.data() + sizeof(dims), image.data.data(), image.data.size() * sizeof(float));
  return fnv1a64_hex(bytes);
}

}  // namespace terragan
