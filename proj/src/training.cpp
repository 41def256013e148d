#include "terragan/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "terragan/generation.hpp"
#include "terragan/losses.hpp"
#include "terragan/models.hpp"
#include "terragan/raster_io.hpp"
#include "terragan/rng.hpp"

namespace terragan {
namespace {

constexpr std::uint64_t kBatchStream = 1;
constexpr std::uint64_t kDiscriminatorLatentStream = 2;
constexpr std::uint64_t kGeneratorLatentStream = 3;
const std::string kOptimizerPrefix = "optimizer.square_avg.";

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

class RmsProp {
 public:
  RmsProp() = default;
  RmsProp(torch::nn::Module& module, const RmsPropConfig& config) : config_(config) {
    for (auto& item : module.named_parameters()) {
      names_.push_back(item.key());
      params_.push_back(item.value());
      square_avg_.push_back(torch::zeros_like(item.value()));
    }
  }

  void zero_grad() {
    for (auto& p : params_) p.mutable_grad() = torch::Tensor();
  }

  void step() {
    torch::NoGradGuard no_grad;
    for (std::size_t i = 0; i < params_.size(); ++i) {
      const auto& grad = params_[i].grad();
      if (!grad.defined()) continue;
      square_avg_[i].mul_(config_.alpha).addcmul_(grad, grad, 1.0 - config_.alpha);
      params_[i].addcdiv_(grad, square_avg_[i].sqrt().add_(config_.epsilon), -config_.learning_rate);
    }
  }

  void save(std::map<std::string, TensorBlob>& out) const {
    for (std::size_t i = 0; i < params_.size(); ++i) {
      const auto flat = square_avg_[i].contiguous().view(-1);
      TensorBlob blob;
      blob.shape.assign(square_avg_[i].sizes().begin(), square_avg_[i].sizes().end());
      blob.values.assign(flat.data_ptr<float>(), flat.data_ptr<float>() + flat.numel());
      out[kOptimizerPrefix + names_[i]] = std::move(blob);
    }
  }

  void load(const std::map<std::string, TensorBlob>& in) {
    torch::NoGradGuard no_grad;
    for (std::size_t i = 0; i < params_.size(); ++i) {
      const auto it = in.find(kOptimizerPrefix + names_[i]);
      if (it == in.end()) throw ResumeError("checkpoint lacks optimizer state for '" + names_[i] + "'");
      if (!square_avg_[i].sizes().equals(it->second.shape)) {
        throw ResumeError("optimizer state for '" + names_[i] + "' has the wrong shape");
      }
      square_avg_[i].copy_(torch::from_blob(const_cast<float*>(it->second.values.data()), square_avg_[i].sizes(),
                                            torch::kFloat32));
    }
  }

 private:
  RmsPropConfig config_;
  std::vector<std::string> names_;
  std::vector<torch::Tensor> params_;
  std::vector<torch::Tensor> square_avg_;
};

torch::Tensor latent_batch(int k, int n, std::uint64_t seed) {
  const auto latents = sample_latent(k, n, seed);
  auto out = torch::empty({n, k}, torch::kFloat32);
  auto* dst = out.data_ptr<float>();
  for (int i = 0; i < n; ++i) std::copy(latents[i].values.begin(), latents[i].values.end(), dst + i * k);
  return out;
}

bool all_finite(const torch::Tensor& t) { return torch::isfinite(t.detach()).all().item<bool>(); }

std::string phase_name(UpdatePhase phase) {
  return phase == UpdatePhase::discriminator ? "discriminator" : "generator";
}

}  // namespace

void TrainingConfig::validate() const {
  if (!(optimizer.learning_rate > 0.0) || !std::isfinite(optimizer.learning_rate)) {
    throw InvalidInput("learning_rate must be > 0");
  }
  if (!(optimizer.alpha >= 0.0 && optimizer.alpha < 1.0)) throw InvalidInput("RMSProp alpha must lie in [0,1)");
  if (!(optimizer.epsilon > 0.0)) throw InvalidInput("RMSProp epsilon must be > 0");
  if (batch_size < 1) throw InvalidInput("batch_size must be >= 1");
  if (total_steps < 0) throw InvalidInput("total_steps must be >= 0");
  if (checkpoint_every < 0) throw InvalidInput("checkpoint_every must be >= 0");
  if (latent_dim < 1) throw InvalidInput("latent_dim must be >= 1");
  if (generator_channels < 1 || discriminator_channels < 1) throw InvalidInput("channel widths must be >= 1");
  loss.validate();
  GeneratorSpec::heightmap(resolution, generator_channels, latent_dim);
}

std::uint64_t TrainingConfig::hash(ModelKind stage) const {
  const nlohmann::json j{{"stage", to_string(stage)},
                         {"learning_rate", optimizer.learning_rate},
                         {"alpha", optimizer.alpha},
                         {"epsilon", optimizer.epsilon},
                         {"batch_size", batch_size},
                         {"variant", to_string(loss.variant)},
                         {"lambda", stage == ModelKind::texture ? loss.lambda : 0.0},
                         {"distance", stage == ModelKind::texture ? to_string(loss.distance) : std::string()},
                         {"seed", seed},
                         {"resolution", resolution},
                         {"latent_dim", stage == ModelKind::heightmap ? latent_dim : 0},
                         {"generator_channels", generator_channels},
                         {"discriminator_channels", discriminator_channels}};
  return fnv1a(j.dump());
}

void write_log_csv(const TrainingLog& log, const std::filesystem::path& path, bool append) {
  const bool fresh = !append || !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::binary | (fresh ? std::ios::trunc : std::ios::app));
  if (!out) throw IoError("cannot write training log " + path.string());
  if (fresh) out << "step,g_loss,d_loss,wall_time_s\n";
  char line[160];
  for (const auto& r : log.records) {
    std::snprintf(line, sizeof(line), "%lld,%.9g,%.9g,%.3f\n", static_cast<long long>(r.step), r.generator_loss,
                  r.discriminator_loss, r.wall_time_s);
    out << line;
  }
  if (!out) throw IoError("failed writing training log " + path.string());
}

TrainingLog read_log_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read training log " + path.string());
  TrainingLog log;
  std::string line;
  std::getline(in, line);
  if (line != "step,g_loss,d_loss,wall_time_s") throw IoError("unexpected training log header in " + path.string());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    LogRecord r;
    long long step = 0;
    if (std::sscanf(line.c_str(), "%lld,%lf,%lf,%lf", &step, &r.generator_loss, &r.discriminator_loss,
                    &r.wall_time_s) != 4) {
      throw IoError("malformed training log row: " + line);
    }
    r.step = step;
    log.records.push_back(r);
  }
  return log;
}

TileDataset load_tile_dataset(const DatasetManifest& manifest, const std::filesystem::path& root, int resolution,
                              std::optional<Split> split, bool with_textures) {
  TileDataset data;
  for (const auto& e : manifest.entries) {
    if (split && e.split != *split) continue;
    data.heightmaps.push_back(
        to_model_range(resize(to_grayscale(read_image(root / e.heightmap_path)), resolution, resolution)));
    if (with_textures) {
      Image texture = read_image(root / e.texture_path);
      if (texture.channels != 3) throw DatasetError("texture crop is not RGB: " + e.texture_path);
      data.textures.push_back(to_model_range(resize(texture, resolution, resolution)));
    }
  }
  if (data.heightmaps.empty()) throw DatasetError("manifest selects no tiles for training");
  return data;
}

TileDataset make_tile_dataset(std::span<const Image> heightmaps, std::span<const Image> textures) {
  TileDataset data;
  for (const auto& h : heightmaps) data.heightmaps.push_back(to_model_range(h));
  for (const auto& t : textures) data.textures.push_back(to_model_range(t));
  return data;
}

TrainingDiverged::TrainingDiverged(std::int64_t s, std::string p, double l)
    : std::runtime_error("non-finite " + p + " loss at step " + std::to_string(s)), step(s), phase(std::move(p)),
      loss(l) {}

struct GanTrainer::Impl {
  ModelKind stage = ModelKind::heightmap;
  TrainingConfig config;
  std::uint64_t config_hash = 0;
  torch::Tensor heightmaps;
  torch::Tensor textures;

  HeightmapGenerator height_gen{nullptr};
  HeightmapDiscriminator height_disc{nullptr};
  TextureGenerator texture_gen{nullptr};
  TextureDiscriminator texture_disc{nullptr};

  RmsProp gen_opt;
  RmsProp disc_opt;
  std::int64_t step = 0;
  std::function<void(const UpdateEvent&)> observer;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

  torch::nn::Module& generator() {
    return stage == ModelKind::heightmap ? static_cast<torch::nn::Module&>(*height_gen)
                                         : static_cast<torch::nn::Module&>(*texture_gen);
  }
  torch::nn::Module& discriminator() {
    return stage == ModelKind::heightmap ? static_cast<torch::nn::Module&>(*height_disc)
                                         : static_cast<torch::nn::Module&>(*texture_disc);
  }

  void notify(std::int64_t s, UpdatePhase phase, bool after) const {
    if (observer) observer(UpdateEvent{s, phase, after});
  }

  torch::Tensor batch_indices(std::int64_t s) const {
    Random rng(derive_seed(config.seed, static_cast<std::uint64_t>(s), kBatchStream));
    auto idx = torch::empty({config.batch_size}, torch::kInt64);
    auto* p = idx.data_ptr<std::int64_t>();
    for (int i = 0; i < config.batch_size; ++i) {
      p[i] = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(heightmaps.size(0))));
    }
    return idx;
  }

  torch::Tensor latents(std::int64_t s, std::uint64_t stream) const {
    return latent_batch(config.latent_dim, config.batch_size,
                        derive_seed(config.seed, static_cast<std::uint64_t>(s), stream));
  }

  static void require_finite_scores(const torch::Tensor& scores, std::int64_t s, UpdatePhase phase) {
    if (!all_finite(scores)) throw TrainingDiverged(s, phase_name(phase), std::nan(""));
  }

  static double checked(const torch::Tensor& loss, std::int64_t s, UpdatePhase phase) {
    const double value = loss.item<double>();
    if (!std::isfinite(value)) throw TrainingDiverged(s, phase_name(phase), value);
    return value;
  }

  double update_discriminator(std::int64_t s) {
    const auto idx = batch_indices(s);
    const auto x = heightmaps.index_select(0, idx);
    torch::Tensor loss;
    if (stage == ModelKind::heightmap) {
      torch::Tensor fake;
      {
        torch::NoGradGuard no_grad;
        fake = height_gen->forward(latents(s, kDiscriminatorLatentStream));
      }
      const auto real_scores = height_disc->forward(x);
      const auto fake_scores = height_disc->forward(fake);
      require_finite_scores(real_scores, s, UpdatePhase::discriminator);
      require_finite_scores(fake_scores, s, UpdatePhase::discriminator);
      loss = heightmap_discriminator_objective(real_scores, fake_scores, config.loss);
    } else {
      const auto y = textures.index_select(0, idx);
      torch::Tensor fake;
      {
        torch::NoGradGuard no_grad;
        fake = texture_gen->forward(x);
      }
      const auto real_scores = texture_disc->forward(x, y);
      const auto fake_scores = texture_disc->forward(x, fake);
      require_finite_scores(real_scores, s, UpdatePhase::discriminator);
      require_finite_scores(fake_scores, s, UpdatePhase::discriminator);
      loss = texture_discriminator_objective(real_scores, fake_scores, config.loss);
    }
    const double value = checked(loss, s, UpdatePhase::discriminator);
    disc_opt.zero_grad();
    loss.backward();
    disc_opt.step();
    disc_opt.zero_grad();
    return value;
  }

  double update_generator(std::int64_t s) {
    torch::Tensor loss;
    if (stage == ModelKind::heightmap) {
      const auto fake_scores = height_disc->forward(height_gen->forward(latents(s, kGeneratorLatentStream)));
      require_finite_scores(fake_scores, s, UpdatePhase::generator);
      loss = heightmap_generator_objective(fake_scores, config.loss);
    } else {
      const auto idx = batch_indices(s);
      const auto x = heightmaps.index_select(0, idx);
      const auto y = textures.index_select(0, idx);
      const auto y_hat = texture_gen->forward(x);
      if (!all_finite(y_hat)) throw TrainingDiverged(s, "generator", std::nan(""));
      const auto fake_scores = texture_disc->forward(x, y_hat);
      require_finite_scores(fake_scores, s, UpdatePhase::generator);
      loss = texture_generator_objective(fake_scores, y, y_hat, config.loss);
    }
    const double value = checked(loss, s, UpdatePhase::generator);
    gen_opt.zero_grad();
    loss.backward();
    gen_opt.step();
    gen_opt.zero_grad();
    disc_opt.zero_grad();
    return value;
  }

  void load_data(TileDataset data) {
    if (data.heightmaps.empty()) throw DatasetError("training needs at least one tile");
    for (const auto& h : data.heightmaps) {
      if (h.height != config.resolution || h.width != config.resolution || h.channels != 1) {
        throw InvalidInput("training heightmaps must be " + std::to_string(config.resolution) + "x" +
                           std::to_string(config.resolution) + "x1");
      }
    }
    heightmaps = images_to_tensor(data.heightmaps);
    if (stage == ModelKind::texture) {
      if (data.textures.size() != data.heightmaps.size()) {
        throw DatasetError("texture training needs one texture per heightmap");
      }
      for (const auto& t : data.textures) {
        if (t.height != config.resolution || t.width != config.resolution || t.channels != 3) {
          throw InvalidInput("training textures must be " + std::to_string(config.resolution) + "x" +
                             std::to_string(config.resolution) + "x3");
        }
      }
      textures = images_to_tensor(data.textures);
    }
  }

  void build(std::uint64_t seed) {
    if (stage == ModelKind::heightmap) {
      height_gen = build_heightmap_generator(
          GeneratorSpec::heightmap(config.resolution, config.generator_channels, config.latent_dim),
          derive_seed(seed, 10));
      height_disc = build_heightmap_discriminator(
          DiscriminatorSpec::heightmap(config.resolution, config.discriminator_channels), derive_seed(seed, 11));
    } else {
      texture_gen = build_texture_generator(GeneratorSpec::texture(config.resolution, config.generator_channels),
                                            derive_seed(seed, 12));
      texture_disc = build_texture_discriminator(
          DiscriminatorSpec::texture(config.resolution, config.discriminator_channels), derive_seed(seed, 13));
    }
    generator().train();
    discriminator().train();
    gen_opt = RmsProp(generator(), config.optimizer);
    disc_opt = RmsProp(discriminator(), config.optimizer);
  }
};

GanTrainer::GanTrainer(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
GanTrainer::GanTrainer(GanTrainer&&) noexcept = default;
GanTrainer& GanTrainer::operator=(GanTrainer&&) noexcept = default;
GanTrainer::~GanTrainer() = default;

GanTrainer GanTrainer::heightmap(TileDataset data, const TrainingConfig& config) {
  config.validate();
  auto impl = std::make_unique<Impl>();
  impl->stage = ModelKind::heightmap;
  impl->config = config;
  impl->config_hash = config.hash(ModelKind::heightmap);
  impl->load_data(std::move(data));
  impl->build(config.seed);
  return GanTrainer(std::move(impl));
}

GanTrainer GanTrainer::texture(TileDataset data, const TrainingConfig& config) {
  config.validate();
  auto impl = std::make_unique<Impl>();
  impl->stage = ModelKind::texture;
  impl->config = config;
  impl->config_hash = config.hash(ModelKind::texture);
  impl->load_data(std::move(data));
  impl->build(config.seed);
  return GanTrainer(std::move(impl));
}

GanTrainer GanTrainer::resume(TileDataset data, const TrainingConfig& config, const ModelCheckpoint& generator,
                              const ModelCheckpoint& discriminator) {
  config.validate();
  ModelKind stage;
  if (generator.role == ModelRole::heightmap_generator && discriminator.role == ModelRole::heightmap_discriminator) {
    stage = ModelKind::heightmap;
  } else if (generator.role == ModelRole::texture_generator &&
             discriminator.role == ModelRole::texture_discriminator) {
    stage = ModelKind::texture;
  } else {
    throw ResumeError("checkpoints " + to_string(generator.role) + " and " + to_string(discriminator.role) +
                      " do not form a generator/discriminator pair");
  }
  const int checkpoint_resolution = generator.generator_spec().output_resolution;
  if (checkpoint_resolution != config.resolution) {
    throw ResumeError("resolution mismatch: checkpoint trained at " + std::to_string(checkpoint_resolution) +
                      "px, configuration asks for " + std::to_string(config.resolution) + "px");
  }
  const std::uint64_t expected = config.hash(stage);
  if (generator.config_hash != expected || discriminator.config_hash != expected) {
    throw ResumeError("configuration hash mismatch: checkpoints were trained with " +
                      hash_to_hex(generator.config_hash) + ", current configuration is " + hash_to_hex(expected));
  }
  if (generator.training_step != discriminator.training_step) {
    throw ResumeError("generator and discriminator checkpoints are from different steps");
  }

  auto impl = std::make_unique<Impl>();
  impl->stage = stage;
  impl->config = config;
  impl->config_hash = expected;
  impl->load_data(std::move(data));
  impl->build(config.seed);
  restore_state(impl->generator(), generator.tensors);
  restore_state(impl->discriminator(), discriminator.tensors);
  impl->gen_opt.load(generator.tensors);
  impl->disc_opt.load(discriminator.tensors);
  impl->step = generator.training_step;
  return GanTrainer(std::move(impl));
}

LogRecord GanTrainer::step() {
  Impl& m = *impl_;
  const std::int64_t s = m.step + 1;
  m.notify(s, UpdatePhase::discriminator, false);
  const double d_loss = m.update_discriminator(s);
  m.notify(s, UpdatePhase::discriminator, true);
  m.notify(s, UpdatePhase::generator, false);
  const double g_loss = m.update_generator(s);
  m.notify(s, UpdatePhase::generator, true);
  m.step = s;
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - m.started).count();
  return LogRecord{s, g_loss, d_loss, elapsed};
}

std::int64_t GanTrainer::completed_steps() const { return impl_->step; }
ModelKind GanTrainer::stage() const { return impl_->stage; }

ModelCheckpoint GanTrainer::generator_checkpoint() const {
  Impl& m = *impl_;
  ModelCheckpoint ckpt = m.stage == ModelKind::heightmap ? make_checkpoint(m.height_gen, m.step, m.config_hash)
                                                         : make_checkpoint(m.texture_gen, m.step, m.config_hash);
  m.gen_opt.save(ckpt.tensors);
  return ckpt;
}

ModelCheckpoint GanTrainer::discriminator_checkpoint() const {
  Impl& m = *impl_;
  ModelCheckpoint ckpt = m.stage == ModelKind::heightmap ? make_checkpoint(m.height_disc, m.step, m.config_hash)
                                                         : make_checkpoint(m.texture_disc, m.step, m.config_hash);
  m.disc_opt.save(ckpt.tensors);
  return ckpt;
}

std::uint64_t GanTrainer::generator_parameter_hash() const { return parameter_hash(impl_->generator()); }
std::uint64_t GanTrainer::discriminator_parameter_hash() const { return parameter_hash(impl_->discriminator()); }

void GanTrainer::set_observer(std::function<void(const UpdateEvent&)> observer) {
  impl_->observer = std::move(observer);
}

GanRunResult run_training(GanTrainer& trainer, const TrainingConfig& config, const CheckpointSink& sink) {
  GanRunResult result;
  while (trainer.completed_steps() < config.total_steps) {
    const LogRecord record = trainer.step();
    result.log.records.push_back(record);
    if (sink && config.checkpoint_every > 0 && record.step % config.checkpoint_every == 0) {
      sink(trainer.generator_checkpoint(), trainer.discriminator_checkpoint());
    }
  }
  result.generator = trainer.generator_checkpoint();
  result.discriminator = trainer.discriminator_checkpoint();
  return result;
}

GanRunResult train_heightmap_gan(const TileDataset& data, const TrainingConfig& config, const CheckpointSink& sink) {
  auto trainer = GanTrainer::heightmap(data, config);
  return run_training(trainer, config, sink);
}

GanRunResult train_texture_gan(const TileDataset& data, const TrainingConfig& config, const CheckpointSink& sink) {
  auto trainer = GanTrainer::texture(data, config);
  return run_training(trainer, config, sink);
}

GanRunResult train_heightmap_gan(const DatasetManifest& manifest, const std::filesystem::path& root,
                                 const TrainingConfig& config, const CheckpointSink& sink) {
  return train_heightmap_gan(load_tile_dataset(manifest, root, config.resolution, Split::train, false), config, sink);
}

GanRunResult train_texture_gan(const DatasetManifest& manifest, const std::filesystem::path& root,
                               const TrainingConfig& config, const CheckpointSink& sink) {
  return train_texture_gan(load_tile_dataset(manifest, root, config.resolution, Split::train, true), config, sink);
}

GanRunResult resume(const ModelCheckpoint& generator, const ModelCheckpoint& discriminator, const TileDataset& data,
                    const TrainingConfig& config, const CheckpointSink& sink) {
  auto trainer = GanTrainer::resume(data, config, generator, discriminator);
  return run_training(trainer, config, sink);
}

}  // namespace terragan
