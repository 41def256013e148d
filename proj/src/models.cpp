#include "terragan/models.hpp"

#include <algorithm>
#include <cstring>

#include "terragan/rng.hpp"

namespace terragan {
namespace {

namespace nn = torch::nn;

// Channel width at a given level, capped at 16x base so 512px depths stay tractable.
int level_channels(int base, int level) { return base << std::min(level, 4); }

nn::Conv2d down_conv(int in, int out) { return nn::Conv2d(nn::Conv2dOptions(in, out, 4).stride(2).padding(1)); }

nn::ConvTranspose2d up_conv(int in, int out, bool bias) {
  return nn::ConvTranspose2d(nn::ConvTranspose2dOptions(in, out, 4).stride(2).padding(1).bias(bias));
}

void require_images(const torch::Tensor& t, int channels, int resolution, const char* what) {
  if (t.dim() != 4 || t.size(1) != channels || t.size(2) != resolution || t.size(3) != resolution) {
    throw InvalidInput(std::string(what) + ": expected [N," + std::to_string(channels) + "," +
                       std::to_string(resolution) + "," + std::to_string(resolution) + "], got " +
                       c10::str(t.sizes()));
  }
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void initialize_weights(nn::Module& module, std::uint64_t seed) {
  torch::NoGradGuard no_grad;
  Random rng(derive_seed(seed, 0x1417));
  for (auto& item : module.named_parameters()) {
    torch::Tensor& p = item.value();
    std::vector<float> values(static_cast<std::size_t>(p.numel()));
    if (ends_with(item.key(), "weight")) {
      const double mean = p.dim() >= 2 ? 0.0 : 1.0;
      for (float& v : values) v = static_cast<float>(mean + 0.02 * rng.normal());
    } else {
      std::fill(values.begin(), values.end(), 0.0f);
    }
    p.copy_(torch::from_blob(values.data(), p.sizes(), torch::kFloat32));
  }
}

template <typename Module>
ModelCheckpoint checkpoint_for(const Module& model, ModelRole role, std::int64_t step, std::uint64_t hash) {
  ModelCheckpoint ckpt;
  ckpt.role = role;
  ckpt.spec = model->spec();
  ckpt.tensors = capture_state(*model);
  ckpt.training_step = step;
  ckpt.config_hash = hash;
  return ckpt;
}

void require_role(const ModelCheckpoint& ckpt, ModelRole role) {
  if (ckpt.role != role) {
    throw CheckpointError("checkpoint holds a " + to_string(ckpt.role) + ", expected a " + to_string(role));
  }
}

}  // namespace

HeightmapGeneratorImpl::HeightmapGeneratorImpl(GeneratorSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  if (spec_.kind != ModelKind::heightmap) throw InvalidInput("heightmap generator needs a heightmap-kind spec");
  const int depth = spec_.depth;
  projected_channels_ = level_channels(spec_.base_channels, depth - 1);
  project_ = register_module("project", nn::Linear(nn::LinearOptions(spec_.latent_dim, projected_channels_ * 16).bias(false)));
  project_norm_ = register_module("project_norm", nn::BatchNorm2d(projected_channels_));
  for (int i = 0; i < depth; ++i) {
    const bool last = i == depth - 1;
    const int in = level_channels(spec_.base_channels, depth - 1 - i);
    const int out = last ? spec_.output_channels : level_channels(spec_.base_channels, depth - 2 - i);
    upsample_->push_back(up_conv(in, out, last));
    if (!last) norms_->push_back(nn::BatchNorm2d(out));
  }
  register_module("upsample", upsample_);
  register_module("norms", norms_);
}

torch::Tensor HeightmapGeneratorImpl::forward(const torch::Tensor& latents) {
  if (latents.dim() != 2 || latents.size(1) != spec_.latent_dim) {
    throw InvalidInput("heightmap generator expects latents of shape [N," + std::to_string(spec_.latent_dim) + "]");
  }
  auto x = project_(latents).view({latents.size(0), projected_channels_, 4, 4});
  x = torch::relu(project_norm_(x));
  const auto n = upsample_->size();
  for (std::size_t i = 0; i < n; ++i) {
    x = upsample_[i]->as<nn::ConvTranspose2d>()->forward(x);
    if (i + 1 < n) x = torch::relu(norms_[i]->as<nn::BatchNorm2d>()->forward(x));
  }
  return torch::tanh(x);
}

HeightmapDiscriminatorImpl::HeightmapDiscriminatorImpl(DiscriminatorSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  if (spec_.kind != ModelKind::heightmap) throw InvalidInput("heightmap discriminator needs a heightmap-kind spec");
  for (int i = 0; i < spec_.depth; ++i) {
    const int in = i == 0 ? spec_.input_channels : level_channels(spec_.base_channels, i - 1);
    downsample_->push_back(down_conv(in, level_channels(spec_.base_channels, i)));
  }
  register_module("downsample", downsample_);
  const int side = spec_.input_resolution >> spec_.depth;
  score_ = register_module("score", nn::Linear(level_channels(spec_.base_channels, spec_.depth - 1) * side * side, 1));
}

torch::Tensor HeightmapDiscriminatorImpl::forward(const torch::Tensor& heightmaps) {
  require_images(heightmaps, spec_.input_channels, spec_.input_resolution, "heightmap discriminator");
  auto x = heightmaps;
  for (auto& layer : *downsample_) x = torch::leaky_relu(layer->as<nn::Conv2d>()->forward(x), 0.2);
  return score_(x.flatten(1)).squeeze(1);
}

TextureGeneratorImpl::TextureGeneratorImpl(GeneratorSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  if (spec_.kind != ModelKind::texture) throw InvalidInput("texture generator needs a texture-kind spec");
  const int depth = spec_.depth;
  const int base = spec_.base_channels;
  for (int i = 0; i < depth; ++i) {
    const int in = i == 0 ? 1 : level_channels(base, i - 1);
    encoder_->push_back(down_conv(in, level_channels(base, i)));
    if (i > 0) encoder_norms_->push_back(nn::BatchNorm2d(level_channels(base, i)));
  }
  for (int i = depth - 1; i >= 0; --i) {
    const int in = i == depth - 1 ? level_channels(base, i) : 2 * level_channels(base, i);
    const int out = i == 0 ? spec_.output_channels : level_channels(base, i - 1);
    decoder_->push_back(up_conv(in, out, i == 0));
    if (i > 0) decoder_norms_->push_back(nn::BatchNorm2d(out));
  }
  register_module("encoder", encoder_);
  register_module("encoder_norms", encoder_norms_);
  register_module("decoder", decoder_);
  register_module("decoder_norms", decoder_norms_);
}

torch::Tensor TextureGeneratorImpl::forward(const torch::Tensor& heightmaps) {
  require_images(heightmaps, 1, spec_.output_resolution, "texture generator");
  const int depth = spec_.depth;
  std::vector<torch::Tensor> skips;
  skips.reserve(depth);
  auto x = heightmaps;
  for (int i = 0; i < depth; ++i) {
    x = encoder_[i]->as<nn::Conv2d>()->forward(x);
    if (i > 0) x = encoder_norms_[i - 1]->as<nn::BatchNorm2d>()->forward(x);
    x = torch::leaky_relu(x, 0.2);
    skips.push_back(x);
  }
  for (int j = 0; j < depth; ++j) {
    const int level = depth - 1 - j;
    if (j > 0) x = torch::cat({x, skips[level]}, 1);
    x = decoder_[j]->as<nn::ConvTranspose2d>()->forward(x);
    if (level > 0) x = torch::relu(decoder_norms_[j]->as<nn::BatchNorm2d>()->forward(x));
  }
  return torch::tanh(x);
}

TextureDiscriminatorImpl::TextureDiscriminatorImpl(DiscriminatorSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  if (spec_.kind != ModelKind::texture) throw InvalidInput("texture discriminator needs a texture-kind spec");
  for (int i = 0; i < spec_.depth; ++i) {
    const int in = i == 0 ? spec_.input_channels : level_channels(spec_.base_channels, i - 1);
    downsample_->push_back(down_conv(in, level_channels(spec_.base_channels, i)));
  }
  register_module("downsample", downsample_);
  patch_score_ = register_module(
      "patch_score", nn::Conv2d(nn::Conv2dOptions(level_channels(spec_.base_channels, spec_.depth - 1), 1, 3).padding(1)));
}

torch::Tensor TextureDiscriminatorImpl::forward(const torch::Tensor& heightmaps, const torch::Tensor& textures) {
  if (heightmaps.dim() == 4 && textures.dim() == 4 &&
      (heightmaps.size(2) != textures.size(2) || heightmaps.size(3) != textures.size(3))) {
    throw InvalidInput("texture discriminator: heightmap and texture spatial sizes differ");
  }
  require_images(heightmaps, 1, spec_.input_resolution, "texture discriminator (heightmap)");
  require_images(textures, 3, spec_.input_resolution, "texture discriminator (texture)");
  if (heightmaps.size(0) != textures.size(0)) throw InvalidInput("texture discriminator: batch sizes differ");
  auto x = torch::cat({heightmaps, textures}, 1);
  for (auto& layer : *downsample_) x = torch::leaky_relu(layer->as<nn::Conv2d>()->forward(x), 0.2);
  return patch_score_(x).mean({1, 2, 3});
}

HeightmapGenerator build_heightmap_generator(const GeneratorSpec& spec, std::uint64_t seed) {
  HeightmapGenerator model(spec);
  initialize_weights(*model, seed);
  return model;
}

HeightmapDiscriminator build_heightmap_discriminator(const DiscriminatorSpec& spec, std::uint64_t seed) {
  HeightmapDiscriminator model(spec);
  initialize_weights(*model, seed);
  return model;
}

TextureGenerator build_texture_generator(const GeneratorSpec& spec, std::uint64_t seed) {
  TextureGenerator model(spec);
  initialize_weights(*model, seed);
  return model;
}

TextureDiscriminator build_texture_discriminator(const DiscriminatorSpec& spec, std::uint64_t seed) {
  TextureDiscriminator model(spec);
  initialize_weights(*model, seed);
  return model;
}

std::map<std::string, TensorBlob> capture_state(const torch::nn::Module& module) {
  std::map<std::string, TensorBlob> out;
  auto add = [&](const std::string& name, const torch::Tensor& t) {
    const auto flat = t.detach().to(torch::kFloat32).contiguous().view(-1);
    TensorBlob blob;
    blob.shape.assign(t.sizes().begin(), t.sizes().end());
    blob.values.assign(flat.data_ptr<float>(), flat.data_ptr<float>() + flat.numel());
    out.emplace(name, std::move(blob));
  };
  for (const auto& item : module.named_parameters()) add(item.key(), item.value());
  for (const auto& item : module.named_buffers()) add(item.key(), item.value());
  return out;
}

void restore_state(torch::nn::Module& module, const std::map<std::string, TensorBlob>& tensors) {
  torch::NoGradGuard no_grad;
  auto load = [&](const std::string& name, torch::Tensor& target) {
    const auto it = tensors.find(name);
    if (it == tensors.end()) throw CheckpointError("checkpoint is missing tensor '" + name + "'");
    const TensorBlob& blob = it->second;
    if (!target.sizes().equals(blob.shape)) {
      throw CheckpointError("tensor '" + name + "' has incompatible shape in checkpoint");
    }
    auto source = torch::from_blob(const_cast<float*>(blob.values.data()), target.sizes(), torch::kFloat32);
    target.copy_(source.to(target.dtype()));
  };
  for (auto& item : module.named_parameters()) load(item.key(), item.value());
  for (auto& item : module.named_buffers()) load(item.key(), item.value());
}

ModelCheckpoint make_checkpoint(const HeightmapGenerator& model, std::int64_t step, std::uint64_t hash) {
  return checkpoint_for(model, ModelRole::heightmap_generator, step, hash);
}
ModelCheckpoint make_checkpoint(const HeightmapDiscriminator& model, std::int64_t step, std::uint64_t hash) {
  return checkpoint_for(model, ModelRole::heightmap_discriminator, step, hash);
}
ModelCheckpoint make_checkpoint(const TextureGenerator& model, std::int64_t step, std::uint64_t hash) {
  return checkpoint_for(model, ModelRole::texture_generator, step, hash);
}
ModelCheckpoint make_checkpoint(const TextureDiscriminator& model, std::int64_t step, std::uint64_t hash) {
  return checkpoint_for(model, ModelRole::texture_discriminator, step, hash);
}

HeightmapGenerator instantiate_heightmap_generator(const ModelCheckpoint& ckpt) {
  require_role(ckpt, ModelRole::heightmap_generator);
  HeightmapGenerator model(ckpt.generator_spec());
  restore_state(*model, ckpt.tensors);
  return model;
}

HeightmapDiscriminator instantiate_heightmap_discriminator(const ModelCheckpoint& ckpt) {
  require_role(ckpt, ModelRole::heightmap_discriminator);
  HeightmapDiscriminator model(ckpt.discriminator_spec());
  restore_state(*model, ckpt.tensors);
  return model;
}

TextureGenerator instantiate_texture_generator(const ModelCheckpoint& ckpt) {
  require_role(ckpt, ModelRole::texture_generator);
  TextureGenerator model(ckpt.generator_spec());
  restore_state(*model, ckpt.tensors);
  return model;
}

TextureDiscriminator instantiate_texture_discriminator(const ModelCheckpoint& ckpt) {
  require_role(ckpt, ModelRole::texture_discriminator);
  TextureDiscriminator model(ckpt.discriminator_spec());
  restore_state(*model, ckpt.tensors);
  return model;
}

std::uint64_t parameter_hash(const torch::nn::Module& module) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const auto& item : module.named_parameters()) {
    const auto flat = item.value().detach().contiguous().view(-1);
    const auto* bytes = reinterpret_cast<const unsigned char*>(flat.data_ptr<float>());
    const auto count = static_cast<std::size_t>(flat.numel()) * sizeof(float);
    for (std::size_t i = 0; i < count; ++i) {
      hash ^= bytes[i];
      hash *= 0x100000001b3ULL;
    }
  }
  return hash;
}

torch::Tensor images_to_tensor(std::span<const Image> images) {
  if (images.empty()) throw InvalidInput("images_to_tensor: empty batch");
  const Image& first = images.front();
  auto batch = torch::empty({static_cast<std::int64_t>(images.size()), first.channels, first.height, first.width},
                            torch::kFloat32);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const Image& img = images[i];
    if (!img.same_shape(first)) throw InvalidInput("images_to_tensor: mixed image shapes");
    auto hwc = torch::from_blob(const_cast<float*>(img.data.data()), {img.height, img.width, img.channels},
                                torch::kFloat32);
    batch[static_cast<std::int64_t>(i)].copy_(hwc.permute({2, 0, 1}));
  }
  return batch;
}

std::vector<Image> tensor_to_images(const torch::Tensor& batch) {
  if (batch.dim() != 4) throw InvalidInput("tensor_to_images: expected NCHW");
  const auto nhwc = batch.detach().to(torch::kFloat32).permute({0, 2, 3, 1}).contiguous();
  std::vector<Image> out;
  out.reserve(static_cast<std::size_t>(batch.size(0)));
  const auto* src = nhwc.data_ptr<float>();
  for (std::int64_t i = 0; i < batch.size(0); ++i) {
    Image img(static_cast<int>(batch.size(2)), static_cast<int>(batch.size(3)), static_cast<int>(batch.size(1)));
    std::memcpy(img.data.data(), src + i * static_cast<std::int64_t>(img.data.size()), img.data.size() * sizeof(float));
    out.push_back(std::move(img));
  }
  return out;
}

}  // namespace terragan
