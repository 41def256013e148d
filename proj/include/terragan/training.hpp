#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "terragan/checkpoint.hpp"
#include "terragan/data_pipeline.hpp"
#include "terragan/image.hpp"
#include "terragan/loss_config.hpp"

namespace terragan {

struct RmsPropConfig {
  double learning_rate = 1e-4;
  double alpha = 0.99;  // squared-gradient decay
  double epsilon = 1e-8;
};

struct TrainingConfig {
  RmsPropConfig optimizer;
  int batch_size = 16;
  std::int64_t total_steps = 0;
  LossConfig loss;
  std::uint64_t seed = 0;
  std::int64_t checkpoint_every = 0;  // 0 disables periodic checkpoints
  int resolution = 32;
  int latent_dim = 100;
  int generator_channels = 32;
  int discriminator_channels = 32;

  void validate() const;

  /// Digest of every setting that shapes the optimization trajectory for the
  /// given stage. total_steps and checkpoint_every are excluded so a run can
  /// be extended on resume.
  [[nodiscard]] std::uint64_t hash(ModelKind stage) const;
};

struct LogRecord {
  std::int64_t step = 0;
  double generator_loss = 0.0;
  double discriminator_loss = 0.0;
  double wall_time_s = 0.0;
};

struct TrainingLog {
  std::vector<LogRecord> records;
};

/// CSV with header "step,g_loss,d_loss,wall_time_s". `append` keeps existing
/// rows (and writes the header only for a new file).
void write_log_csv(const TrainingLog& log, const std::filesystem::path& path, bool append = false);
TrainingLog read_log_csv(const std::filesystem::path& path);

/// Training tiles in model range: heightmaps R x R x 1, textures R x R x 3
/// (textures may be empty for heightmap-only training).
struct TileDataset {
  std::vector<Image> heightmaps;
  std::vector<Image> textures;

  [[nodiscard]] std::size_t size() const { return heightmaps.size(); }
};

/// Loads crops referenced by `manifest` (paths relative to `root`), keeps the
/// entries in `split` (all when absent), resamples to `resolution`, and maps
/// to model range.
TileDataset load_tile_dataset(const DatasetManifest& manifest, const std::filesystem::path& root, int resolution,
                              std::optional<Split> split = Split::train, bool with_textures = true);

/// Builds a dataset from [0,1] images.
TileDataset make_tile_dataset(std::span<const Image> heightmaps, std::span<const Image> textures = {});

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(std::int64_t step, std::string phase, double loss);
  std::int64_t step;
  std::string phase;
  double loss;
};

class ResumeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class UpdatePhase { discriminator, generator };

struct UpdateEvent {
  std::int64_t step = 0;
  UpdatePhase phase = UpdatePhase::discriminator;
  bool after = false;  // false: about to update, true: update applied
};

/// Alternating GAN optimization. Each step() performs one discriminator
/// update followed by one generator update. Randomness for step s is derived
/// from (seed, s), so a resumed trainer replays the uninterrupted trajectory.
class GanTrainer {
 public:
  GanTrainer(GanTrainer&&) noexcept;
  GanTrainer& operator=(GanTrainer&&) noexcept;
  ~GanTrainer();

  /// Fresh networks initialized from config.seed.
  static GanTrainer heightmap(TileDataset data, const TrainingConfig& config);
  static GanTrainer texture(TileDataset data, const TrainingConfig& config);

  /// Continue from checkpoints holding optimizer state. Throws ResumeError when
  /// the checkpoints were produced under a different configuration.
  static GanTrainer resume(TileDataset data, const TrainingConfig& config, const ModelCheckpoint& generator,
                           const ModelCheckpoint& discriminator);

  LogRecord step();

  [[nodiscard]] std::int64_t completed_steps() const;
  [[nodiscard]] ModelKind stage() const;

  /// Checkpoints include optimizer state so they can be resumed.
  [[nodiscard]] ModelCheckpoint generator_checkpoint() const;
  [[nodiscard]] ModelCheckpoint discriminator_checkpoint() const;

  [[nodiscard]] std::uint64_t generator_parameter_hash() const;
  [[nodiscard]] std::uint64_t discriminator_parameter_hash() const;

  void set_observer(std::function<void(const UpdateEvent&)> observer);

 private:
  struct Impl;
  explicit GanTrainer(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

struct GanRunResult {
  ModelCheckpoint generator;
  ModelCheckpoint discriminator;
  TrainingLog log;
};

using CheckpointSink = std::function<void(const ModelCheckpoint& generator, const ModelCheckpoint& discriminator)>;

/// Runs `trainer` until config.total_steps, emitting checkpoints every
/// config.checkpoint_every steps.
GanRunResult run_training(GanTrainer& trainer, const TrainingConfig& config, const CheckpointSink& sink = {});

GanRunResult train_heightmap_gan(const TileDataset& data, const TrainingConfig& config,
                                 const CheckpointSink& sink = {});
GanRunResult train_texture_gan(const TileDataset& data, const TrainingConfig& config, const CheckpointSink& sink = {});

GanRunResult train_heightmap_gan(const DatasetManifest& manifest, const std::filesystem::path& root,
                                 const TrainingConfig& config, const CheckpointSink& sink = {});
GanRunResult train_texture_gan(const DatasetManifest& manifest, const std::filesystem::path& root,
                               const TrainingConfig& config, const CheckpointSink& sink = {});

/// Continues from saved checkpoints up to config.total_steps; the log holds
/// only the new steps.
GanRunResult resume(const ModelCheckpoint& generator, const ModelCheckpoint& discriminator, const TileDataset& data,
                    const TrainingConfig& config, const CheckpointSink& sink = {});

}  // namespace terragan
