#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace terragan {

enum class ModelKind { heightmap, texture };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& text);

/// Heightmap kind: latent -> res x res x 1 via project-and-upsample, res = 4 * 2^depth.
/// Texture kind: encoder-decoder with skip connections, 1 -> 3 channels, res preserved.
struct GeneratorSpec {
  ModelKind kind = ModelKind::heightmap;
  int output_resolution = 32;
  int base_channels = 32;
  int depth = 3;
  int output_channels = 1;
  bool skip_connections = false;
  int latent_dim = 100;  // heightmap kind only

  static GeneratorSpec heightmap(int resolution, int base_channels = 32, int latent_dim = 100);
  static GeneratorSpec texture(int resolution, int base_channels = 32);

  void validate() const;
  friend bool operator==(const GeneratorSpec&, const GeneratorSpec&) = default;
};

/// Stride-2 convolution stack with a linear (unsquashed) score. The texture
/// kind consumes heightmap and texture concatenated to 4 channels and averages
/// its patch scores into one scalar per sample.
struct DiscriminatorSpec {
  ModelKind kind = ModelKind::heightmap;
  int input_resolution = 32;
  int base_channels = 32;
  int depth = 3;
  int input_channels = 1;

  static DiscriminatorSpec heightmap(int resolution, int base_channels = 32);
  static DiscriminatorSpec texture(int resolution, int base_channels = 32);

  void validate() const;
  friend bool operator==(const DiscriminatorSpec&, const DiscriminatorSpec&) = default;
};

enum class ModelRole { heightmap_generator, heightmap_discriminator, texture_generator, texture_discriminator };

std::string to_string(ModelRole role);
ModelRole model_role_from_string(const std::string& text);

struct TensorBlob {
  std::vector<std::int64_t> shape;
  std::vector<float> values;

  friend bool operator==(const TensorBlob&, const TensorBlob&) = default;
};

/// Serialized network: architecture spec, named parameters and buffers, and
/// (for training checkpoints) optimizer state under the "optimizer." prefix.
struct ModelCheckpoint {
  ModelRole role = ModelRole::heightmap_generator;
  std::variant<GeneratorSpec, DiscriminatorSpec> spec;
  std::map<std::string, TensorBlob> tensors;
  std::int64_t training_step = 0;
  std::string normalization = "[-1,1]";
  std::uint64_t config_hash = 0;

  [[nodiscard]] const GeneratorSpec& generator_spec() const;
  [[nodiscard]] const DiscriminatorSpec& discriminator_spec() const;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Container: "TERRAGAN" magic, u32 version, u64 header length, JSON header
/// (role, spec, step, normalization, config hash, tensor index), then float32
/// little-endian blobs in index order.
void save_checkpoint(const ModelCheckpoint& checkpoint, const std::filesystem::path& path);
ModelCheckpoint load_checkpoint(const std::filesystem::path& path);
/// As above, and rejects a checkpoint whose role differs from `expected`.
ModelCheckpoint load_checkpoint(const std::filesystem::path& path, ModelRole expected);

std::string hash_to_hex(std::uint64_t hash);

}  // namespace terragan
