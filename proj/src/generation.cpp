#include "terragan/generation.hpp"

#include <algorithm>

#include "terragan/models.hpp"
#include "terragan/rng.hpp"

namespace terragan {
namespace {

torch::Tensor latents_to_tensor(std::span<const LatentVector> latents, int k) {
  auto out = torch::empty({static_cast<std::int64_t>(latents.size()), k}, torch::kFloat32);
  auto* dst = out.data_ptr<float>();
  for (std::size_t i = 0; i < latents.size(); ++i) {
    if (latents[i].k() != k) {
      throw InvalidInput("latent has " + std::to_string(latents[i].k()) + " values, generator expects " +
                         std::to_string(k));
    }
    std::copy(latents[i].values.begin(), latents[i].values.end(), dst + i * static_cast<std::size_t>(k));
  }
  return out;
}

}  // namespace

void GenerationRequest::validate() const {
  if (count < 1) throw InvalidInput("generation count must be >= 1");
  if (!(blur_radius_px >= 0.0)) throw InvalidInput("blur radius must be >= 0");
}

std::vector<LatentVector> sample_latent(int k, int n, std::uint64_t seed) {
  if (k < 1) throw InvalidInput("sample_latent: k must be >= 1");
  if (n < 1) throw InvalidInput("sample_latent: n must be >= 1");
  Random rng(seed);
  std::vector<LatentVector> out(static_cast<std::size_t>(n));
  for (auto& z : out) {
    z.values.resize(static_cast<std::size_t>(k));
    for (float& v : z.values) v = static_cast<float>(rng.normal());
  }
  return out;
}

std::vector<Image> generate_heightmaps(const ModelCheckpoint& generator, std::span<const LatentVector> latents) {
  if (latents.empty()) return {};
  auto model = instantiate_heightmap_generator(generator);
  model->eval();
  torch::NoGradGuard no_grad;
  return tensor_to_images(model->forward(latents_to_tensor(latents, model->spec().latent_dim)));
}

std::vector<Image> generate_textures(const ModelCheckpoint& generator, std::span<const Image> heightmaps) {
  if (heightmaps.empty()) return {};
  auto model = instantiate_texture_generator(generator);
  model->eval();
  torch::NoGradGuard no_grad;
  return tensor_to_images(model->forward(images_to_tensor(heightmaps)));
}

std::vector<LatentVector> interpolate_latents(const LatentVector& z1, const LatentVector& z2, int steps) {
  if (steps < 2) throw InvalidInput("interpolate_latents: steps must be >= 2");
  if (z1.k() != z2.k()) throw InvalidInput("interpolate_latents: latent sizes differ");
  std::vector<LatentVector> out(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    const double a = static_cast<double>(i) / (steps - 1);
    auto& z = out[static_cast<std::size_t>(i)].values;
    z.resize(z1.values.size());
    for (std::size_t j = 0; j < z.size(); ++j) {
      z[j] = static_cast<float>((1.0 - a) * z1.values[j] + a * z2.values[j]);
    }
  }
  out.front() = z1;
  out.back() = z2;
  return out;
}

std::vector<TerrainPair> generate_pairs(const ModelCheckpoint& heightmap_generator,
                                        const ModelCheckpoint& texture_generator,
                                        std::span<const LatentVector> latents, double blur_radius) {
  const int height_res = heightmap_generator.generator_spec().output_resolution;
  const int texture_res = texture_generator.generator_spec().output_resolution;
  if (height_res != texture_res) {
    throw InvalidInput("heightmap generator emits " + std::to_string(height_res) + "px, texture generator expects " +
                       std::to_string(texture_res) + "px");
  }
  auto heightmaps = generate_heightmaps(heightmap_generator, latents);
  for (auto& h : heightmaps) h = gaussian_blur(h, blur_radius);
  auto textures = generate_textures(texture_generator, heightmaps);
  std::vector<TerrainPair> out;
  out.reserve(heightmaps.size());
  for (std::size_t i = 0; i < heightmaps.size(); ++i) out.push_back({std::move(heightmaps[i]), std::move(textures[i])});
  return out;
}

TerrainPair generate_pair(const ModelCheckpoint& heightmap_generator, const ModelCheckpoint& texture_generator,
                          const LatentVector& z, double blur_radius) {
  return std::move(generate_pairs(heightmap_generator, texture_generator, std::span(&z, 1), blur_radius).front());
}

Image montage(std::span<const Image> images, int rows, int cols, float fill) {
  if (rows < 1 || cols < 1) throw InvalidInput("montage: rows and cols must be >= 1");
  if (images.empty()) throw InvalidInput("montage: no images");
  if (static_cast<std::size_t>(rows) * cols < images.size()) throw InvalidInput("montage: grid too small");
  const Image& first = images.front();
  for (const auto& img : images) {
    if (!img.same_shape(first)) throw InvalidInput("montage: images differ in size");
  }
  Image out(rows * first.height, cols * first.width, first.channels, fill);
  const std::size_t row_len = static_cast<std::size_t>(first.width) * first.channels;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const int cell_r = static_cast<int>(i) / cols;
    const int cell_c = static_cast<int>(i) % cols;
    for (int r = 0; r < first.height; ++r) {
      std::copy_n(&images[i].data[r * row_len], row_len,
                  &out.at(cell_r * first.height + r, cell_c * first.width));
    }
  }
  return out;
}

}  // namespace terragan
