#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <torch/torch.h>

#include "terragan/checkpoint.hpp"
#include "terragan/image.hpp"

namespace terragan {

// Tensors are NCHW float32 in model range [-1,1].

/// Latent [N,k] -> heightmap [N,1,R,R]: linear projection to 4x4, then
/// fractionally-strided convolutions with batch norm, tanh output.
class HeightmapGeneratorImpl : public torch::nn::Module {
 public:
  explicit HeightmapGeneratorImpl(GeneratorSpec spec);
  torch::Tensor forward(const torch::Tensor& latents);
  [[nodiscard]] const GeneratorSpec& spec() const { return spec_; }

 private:
  GeneratorSpec spec_;
  int projected_channels_;
  torch::nn::Linear project_{nullptr};
  torch::nn::BatchNorm2d project_norm_{nullptr};
  torch::nn::ModuleList upsample_;
  torch::nn::ModuleList norms_;
};
TORCH_MODULE(HeightmapGenerator);

/// Heightmap [N,1,R,R] -> score [N]; no output squashing.
class HeightmapDiscriminatorImpl : public torch::nn::Module {
 public:
  explicit HeightmapDiscriminatorImpl(DiscriminatorSpec spec);
  torch::Tensor forward(const torch::Tensor& heightmaps);
  [[nodiscard]] const DiscriminatorSpec& spec() const { return spec_; }

 private:
  DiscriminatorSpec spec_;
  torch::nn::ModuleList downsample_;
  torch::nn::Linear score_{nullptr};
};
TORCH_MODULE(HeightmapDiscriminator);

/// Heightmap [N,1,R,R] -> texture [N,3,R,R]; encoder-decoder where each
/// decoder level also sees the matching encoder activation.
class TextureGeneratorImpl : public torch::nn::Module {
 public:
  explicit TextureGeneratorImpl(GeneratorSpec spec);
  torch::Tensor forward(const torch::Tensor& heightmaps);
  [[nodiscard]] const GeneratorSpec& spec() const { return spec_; }

 private:
  GeneratorSpec spec_;
  torch::nn::ModuleList encoder_;
  torch::nn::ModuleList encoder_norms_;
  torch::nn::ModuleList decoder_;
  torch::nn::ModuleList decoder_norms_;
};
TORCH_MODULE(TextureGenerator);

/// (heightmap [N,1,R,R], texture [N,3,R,R]) -> score [N]: patch scores over
/// the channel-concatenated pair, averaged per sample.
class TextureDiscriminatorImpl : public torch::nn::Module {
 public:
  explicit TextureDiscriminatorImpl(DiscriminatorSpec spec);
  torch::Tensor forward(const torch::Tensor& heightmaps, const torch::Tensor& textures);
  [[nodiscard]] const DiscriminatorSpec& spec() const { return spec_; }

 private:
  DiscriminatorSpec spec_;
  torch::nn::ModuleList downsample_;
  torch::nn::Conv2d patch_score_{nullptr};
};
TORCH_MODULE(TextureDiscriminator);

/// Builders validate the spec and draw initial weights from `seed`
/// (conv/linear weights N(0, 0.02), norm scales N(1, 0.02), biases 0).
HeightmapGenerator build_heightmap_generator(const GeneratorSpec& spec, std::uint64_t seed = 0);
HeightmapDiscriminator build_heightmap_discriminator(const DiscriminatorSpec& spec, std::uint64_t seed = 0);
TextureGenerator build_texture_generator(const GeneratorSpec& spec, std::uint64_t seed = 0);
TextureDiscriminator build_texture_discriminator(const DiscriminatorSpec& spec, std::uint64_t seed = 0);

/// Parameters and buffers of `module` as checkpoint blobs.
std::map<std::string, TensorBlob> capture_state(const torch::nn::Module& module);
/// Copies blobs back; every parameter and buffer must be present with a matching shape.
void restore_state(torch::nn::Module& module, const std::map<std::string, TensorBlob>& tensors);

ModelCheckpoint make_checkpoint(const HeightmapGenerator& model, std::int64_t step = 0, std::uint64_t config_hash = 0);
ModelCheckpoint make_checkpoint(const HeightmapDiscriminator& model, std::int64_t step = 0,
                                std::uint64_t config_hash = 0);
ModelCheckpoint make_checkpoint(const TextureGenerator& model, std::int64_t step = 0, std::uint64_t config_hash = 0);
ModelCheckpoint make_checkpoint(const TextureDiscriminator& model, std::int64_t step = 0,
                                std::uint64_t config_hash = 0);

/// Rebuild a network from a checkpoint; throws CheckpointError on a role mismatch.
HeightmapGenerator instantiate_heightmap_generator(const ModelCheckpoint& checkpoint);
HeightmapDiscriminator instantiate_heightmap_discriminator(const ModelCheckpoint& checkpoint);
TextureGenerator instantiate_texture_generator(const ModelCheckpoint& checkpoint);
TextureDiscriminator instantiate_texture_discriminator(const ModelCheckpoint& checkpoint);

/// FNV-1a over all parameter values (buffers excluded).
std::uint64_t parameter_hash(const torch::nn::Module& module);

torch::Tensor images_to_tensor(std::span<const Image> images);
std::vector<Image> tensor_to_images(const torch::Tensor& batch);

}  // namespace terragan
