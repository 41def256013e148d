#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "terragan/checkpoint.hpp"
#include "terragan/image.hpp"

namespace terragan {

struct LatentVector {
  std::vector<float> values;

  [[nodiscard]] int k() const { return static_cast<int>(values.size()); }
  friend bool operator==(const LatentVector&, const LatentVector&) = default;
};

struct GenerationRequest {
  int count = 1;
  std::uint64_t seed = 0;
  double blur_radius_px = 0.4;
  bool emit_texture = true;

  void validate() const;
};

/// n draws from the standard normal prior, k values each.
std::vector<LatentVector> sample_latent(int k, int n, std::uint64_t seed);

/// Decodes latents with a heightmap generator checkpoint (inference mode).
/// Output images are R x R x 1 in model range, in input order.
std::vector<Image> generate_heightmaps(const ModelCheckpoint& generator, std::span<const LatentVector> latents);

/// Translates model-range heightmaps into R x R x 3 textures.
std::vector<Image> generate_textures(const ModelCheckpoint& generator, std::span<const Image> heightmaps);

/// Element i is (1 - a_i) z1 + a_i z2 with a_i = i / (steps - 1).
std::vector<LatentVector> interpolate_latents(const LatentVector& z1, const LatentVector& z2, int steps);

/// Separable Gaussian with sigma = radius_px, half-width max(1, ceil(3 sigma)),
/// kernel normalized to sum 1, borders mirrored with the edge sample repeated
/// (... c b a | a b c ...). Radius 0 returns the input unchanged.
Image gaussian_blur(const Image& image, double radius_px);

/// Normalized 1-D taps for gaussian_blur, index 0 is the centre.
std::vector<double> gaussian_kernel(double sigma);

struct TerrainPair {
  Image heightmap;  // model range
  Image texture;    // model range
};

/// texture = G_t(blur(G_h(z))); the returned heightmap is the blurred one.
std::vector<TerrainPair> generate_pairs(const ModelCheckpoint& heightmap_generator,
                                        const ModelCheckpoint& texture_generator,
                                        std::span<const LatentVector> latents, double blur_radius);
TerrainPair generate_pair(const ModelCheckpoint& heightmap_generator, const ModelCheckpoint& texture_generator,
                          const LatentVector& z, double blur_radius);

/// Row-major grid of equally sized images; unused cells take `fill`
/// (model-range black by default).
Image montage(std::span<const Image> images, int rows, int cols, float fill = -1.0f);

}  // namespace terragan
