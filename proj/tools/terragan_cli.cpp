// terragan: dataset preparation, two-stage GAN training, generation and export.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "terragan/baselines.hpp"
#include "terragan/data_pipeline.hpp"
#include "terragan/export.hpp"
#include "terragan/generation.hpp"
#include "terragan/raster_io.hpp"
#include "terragan/rng.hpp"
#include "terragan/run_config.hpp"
#include "terragan/training.hpp"

namespace fs = std::filesystem;
using namespace terragan;

namespace {

constexpr int kRuntimeFailure = 1;
constexpr int kUsageError = 2;

/// Raised for bad flags/inputs discovered after parsing; maps to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SharedFlags {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
};

void add_shared(CLI::App* cmd, SharedFlags& flags) {
  cmd->add_option("--config", flags.config, "JSON run configuration; flags override its values");
  cmd->add_option("--seed", flags.seed, "Seed for all randomness in this command");
  cmd->add_option("--out", flags.out, "Output directory")->capture_default_str();
}

template <typename T>
void override_with(T& target, const std::optional<T>& value) {
  if (value) target = *value;
}

RunConfig base_config(const SharedFlags& flags, const std::string& command) {
  RunConfig cfg = flags.config ? load_run_config(*flags.config) : RunConfig{};
  cfg.command = command;
  if (flags.seed) cfg.seed = *flags.seed;
  cfg.training.seed = cfg.seed;
  cfg.generation.seed = cfg.seed;
  return cfg;
}

void require_file(const std::string& path, const std::string& what) {
  if (!fs::is_regular_file(path)) throw UsageError(what + " not found: " + path);
}

void prepare_out(const SharedFlags& flags, const RunConfig& cfg) {
  fs::create_directories(flags.out);
  write_run_config(cfg, fs::path(flags.out) / "config.json");
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------- prepare-data

struct PrepareFlags {
  SharedFlags shared;
  std::string heightmap;
  std::string texture;
  std::optional<std::string> reference;
  std::vector<int> reference_tile;
  std::optional<int> tile_size, stride, top_m;
  std::optional<double> max_black, black_threshold, val_fraction;
};

int run_prepare(const PrepareFlags& f) {
  RunConfig cfg = base_config(f.shared, "prepare-data");
  override_with(cfg.filter.tile_size, f.tile_size);
  override_with(cfg.filter.stride, f.stride);
  override_with(cfg.filter.top_m, f.top_m);
  override_with(cfg.filter.max_black_fraction, f.max_black);
  override_with(cfg.filter.black_intensity_threshold, f.black_threshold);
  override_with(cfg.filter.val_fraction, f.val_fraction);
  cfg.inputs["heightmap"] = f.heightmap;
  cfg.inputs["texture"] = f.texture;

  require_file(f.heightmap, "heightmap raster");
  require_file(f.texture, "texture raster");
  if (!f.reference && f.reference_tile.empty()) {
    throw UsageError("a reference texture is required: pass --reference PATH or --reference-tile X Y");
  }

  const WorldImagePair world = WorldImagePair::load(f.heightmap, f.texture);
  FilterConfig filter;
  filter.tile_size = cfg.filter.tile_size;
  filter.stride = cfg.filter.stride;
  filter.max_black_fraction = cfg.filter.max_black_fraction;
  filter.black_intensity_threshold = cfg.filter.black_intensity_threshold;
  filter.top_m = cfg.filter.top_m;
  filter.validate();
  if (filter.tile_size > world.heightmap.height || filter.tile_size > world.heightmap.width) {
    throw UsageError("tile size exceeds the world raster dimensions");
  }

  if (f.reference) {
    require_file(*f.reference, "reference texture");
    cfg.inputs["reference"] = *f.reference;
    filter.reference_texture = read_image(*f.reference);
    if (filter.reference_texture.channels != 3 || filter.reference_texture.height != filter.tile_size ||
        filter.reference_texture.width != filter.tile_size) {
      throw UsageError("reference texture must be an RGB image of tile size " + std::to_string(filter.tile_size));
    }
  } else {
    const int x = f.reference_tile[0];
    const int y = f.reference_tile[1];
    cfg.inputs["reference_tile"] = std::to_string(x) + "," + std::to_string(y);
    if (x < 0 || y < 0 || x + filter.tile_size > world.texture.width || y + filter.tile_size > world.texture.height) {
      throw UsageError("--reference-tile window does not fit inside the texture raster");
    }
    filter.reference_texture = world.texture.crop(y, x, filter.tile_size, filter.tile_size);
  }

  prepare_out(f.shared, cfg);
  PrepareStats stats;
  const auto manifest = prepare_dataset(world, filter, cfg.filter.val_fraction, cfg.seed, f.shared.out, &stats);
  std::printf("candidate tiles: %zu\n", stats.candidates);
  std::printf("after black filter (< %g black): %zu\n", filter.max_black_fraction, stats.after_black_filter);
  if (stats.top_m_clamped) {
    std::fprintf(stderr, "warning: top-m %d exceeds the %zu surviving tiles; keeping all of them\n", filter.top_m,
                 stats.after_black_filter);
  }
  std::printf("selected (top-m %d): %zu\n", filter.top_m, stats.selected);
  std::printf("split: train %zu, val %zu\n", stats.train, stats.val);
  std::printf("manifest: %s\n", (fs::path(f.shared.out) / "manifest.jsonl").c_str());
  return manifest.entries.empty() ? kRuntimeFailure : 0;
}

// -------------------------------------------------------------------- training

struct TrainFlags {
  SharedFlags shared;
  std::string manifest;
  std::optional<std::int64_t> steps, checkpoint_every;
  std::optional<int> batch_size, resolution, latent_dim, gen_channels, disc_channels;
  std::optional<double> lr, lambda;
  std::optional<std::string> loss, distance;
  bool resume = false;
};

int run_train(const TrainFlags& f, ModelKind stage) {
  const bool heightmap_stage = stage == ModelKind::heightmap;
  RunConfig cfg = base_config(f.shared, heightmap_stage ? "train-heightmap" : "train-texture");
  TrainingConfig& t = cfg.training;
  override_with(t.total_steps, f.steps);
  override_with(t.checkpoint_every, f.checkpoint_every);
  override_with(t.batch_size, f.batch_size);
  override_with(t.resolution, f.resolution);
  override_with(t.latent_dim, f.latent_dim);
  override_with(t.generator_channels, f.gen_channels);
  override_with(t.discriminator_channels, f.disc_channels);
  override_with(t.optimizer.learning_rate, f.lr);
  override_with(t.loss.lambda, f.lambda);
  if (f.loss) t.loss.variant = variant_from_string(*f.loss);
  if (f.distance) t.loss.distance = distance_from_string(*f.distance);
  t.validate();
  cfg.inputs["manifest"] = f.manifest;
  require_file(f.manifest, "manifest");

  std::printf("optimizer: RMSProp lr=%g alpha=%g epsilon=%g\n", t.optimizer.learning_rate, t.optimizer.alpha,
              t.optimizer.epsilon);
  std::printf("loss: %s\n", to_string(t.loss.variant).c_str());
  if (!heightmap_stage) std::printf("lambda: %g distance: %s\n", t.loss.lambda, to_string(t.loss.distance).c_str());
  std::printf("batch_size: %d resolution: %d steps: %lld seed: %llu\n", t.batch_size, t.resolution,
              static_cast<long long>(t.total_steps), static_cast<unsigned long long>(t.seed));

  const fs::path manifest_path = f.manifest;
  const DatasetManifest manifest = read_manifest(manifest_path);
  TileDataset data = load_tile_dataset(manifest, manifest_path.parent_path(), t.resolution, Split::train,
                                       !heightmap_stage);
  std::printf("training tiles: %zu\n", data.size());

  const fs::path out = f.shared.out;
  const std::string g_name = heightmap_stage ? "G_h" : "G_t";
  const std::string d_name = heightmap_stage ? "D_h" : "D_t";
  const ModelRole g_role = heightmap_stage ? ModelRole::heightmap_generator : ModelRole::texture_generator;
  const ModelRole d_role = heightmap_stage ? ModelRole::heightmap_discriminator : ModelRole::texture_discriminator;

  std::optional<GanTrainer> trainer;
  if (f.resume) {
    const auto g_path = out / (g_name + ".ckpt");
    const auto d_path = out / (d_name + ".ckpt");
    if (!fs::exists(g_path) || !fs::exists(d_path)) {
      throw UsageError("--resume needs " + g_path.string() + " and " + d_path.string());
    }
    trainer.emplace(GanTrainer::resume(std::move(data), t, load_checkpoint(g_path, g_role),
                                       load_checkpoint(d_path, d_role)));
    std::printf("resuming at step %lld\n", static_cast<long long>(trainer->completed_steps()));
  } else {
    trainer.emplace(heightmap_stage ? GanTrainer::heightmap(std::move(data), t)
                                    : GanTrainer::texture(std::move(data), t));
  }
  prepare_out(f.shared, cfg);

  TrainingLog log;
  try {
    while (trainer->completed_steps() < t.total_steps) {
      const LogRecord record = trainer->step();
      log.records.push_back(record);
      if (t.checkpoint_every > 0 && record.step % t.checkpoint_every == 0) {
        fs::create_directories(out / "checkpoints");
        char prefix[64];
        std::snprintf(prefix, sizeof(prefix), "step%07lld_", static_cast<long long>(record.step));
        save_checkpoint(trainer->generator_checkpoint(), out / "checkpoints" / (prefix + g_name + ".ckpt"));
        save_checkpoint(trainer->discriminator_checkpoint(), out / "checkpoints" / (prefix + d_name + ".ckpt"));
        std::printf("step %lld  g_loss %.6f  d_loss %.6f\n", static_cast<long long>(record.step),
                    record.generator_loss, record.discriminator_loss);
      }
    }
  } catch (const TrainingDiverged& e) {
    write_log_csv(log, out / "log.csv", f.resume);
    save_checkpoint(trainer->generator_checkpoint(), out / ("diverged_" + g_name + ".ckpt"));
    save_checkpoint(trainer->discriminator_checkpoint(), out / ("diverged_" + d_name + ".ckpt"));
    write_json(out / "diverged.json", {{"step", e.step},
                                       {"phase", e.phase},
                                       {"loss", std::isfinite(e.loss) ? nlohmann::json(e.loss) : nlohmann::json("nan")},
                                       {"last_completed_step", trainer->completed_steps()}});
    std::fprintf(stderr, "error: %s; state dumped to %s\n", e.what(), out.c_str());
    return kRuntimeFailure;
  }

  write_log_csv(log, out / "log.csv", f.resume);
  save_checkpoint(trainer->generator_checkpoint(), out / (g_name + ".ckpt"));
  save_checkpoint(trainer->discriminator_checkpoint(), out / (d_name + ".ckpt"));
  std::printf("finished at step %lld; checkpoints in %s\n", static_cast<long long>(trainer->completed_steps()),
              out.c_str());
  return 0;
}

// ------------------------------------------------------------------ generation

std::pair<int, int> parse_grid(const std::string& text) {
  int rows = 0;
  int cols = 0;
  char sep = 0;
  if (std::sscanf(text.c_str(), "%d%c%d", &rows, &sep, &cols) != 3 || (sep != 'x' && sep != 'X') || rows < 1 ||
      cols < 1) {
    throw UsageError("grid must look like RxC, e.g. 3x3 (got '" + text + "')");
  }
  return {rows, cols};
}

std::string numbered(const std::string& stem, std::size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%03zu.png", stem.c_str(), i);
  return buf;
}

Image gray_to_rgb(const Image& gray) {
  Image rgb(gray.height, gray.width, 3);
  for (std::size_t i = 0; i < gray.pixel_count(); ++i) {
    for (int c = 0; c < 3; ++c) rgb.data[i * 3 + c] = gray.data[i];
  }
  return rgb;
}

// Heightmap and texture side by side in one RGB cell.
Image side_by_side(const Image& heightmap, const Image& texture) {
  const Image left = gray_to_rgb(heightmap);
  Image cell(left.height, 2 * left.width, 3);
  for (int r = 0; r < left.height; ++r) {
    for (int c = 0; c < left.width; ++c) {
      for (int k = 0; k < 3; ++k) {
        cell.at(r, c, k) = left.at(r, c, k);
        cell.at(r, c + left.width, k) = texture.at(r, c, k);
      }
    }
  }
  return cell;
}

struct GenerateFlags {
  SharedFlags shared;
  std::string heightmap_model;
  std::optional<std::string> texture_model;
  std::optional<int> count;
  std::optional<double> blur;
  std::optional<std::string> montage_grid;
  bool no_texture = false;
};

int run_generate(const GenerateFlags& f) {
  RunConfig cfg = base_config(f.shared, "generate");
  override_with(cfg.generation.count, f.count);
  override_with(cfg.generation.blur_radius_px, f.blur);
  if (f.no_texture) cfg.generation.emit_texture = false;
  cfg.generation.validate();
  const GenerationRequest& req = cfg.generation;

  require_file(f.heightmap_model, "heightmap generator checkpoint");
  cfg.inputs["heightmap_model"] = f.heightmap_model;
  if (req.emit_texture) {
    if (!f.texture_model) throw UsageError("--texture-model is required unless --no-texture is given");
    require_file(*f.texture_model, "texture generator checkpoint");
    cfg.inputs["texture_model"] = *f.texture_model;
  }
  std::optional<std::pair<int, int>> grid;
  if (f.montage_grid) {
    grid = parse_grid(*f.montage_grid);
    if (static_cast<long long>(grid->first) * grid->second < req.count) {
      throw UsageError("montage grid " + *f.montage_grid + " cannot hold " + std::to_string(req.count) + " images");
    }
    cfg.inputs["montage"] = *f.montage_grid;
  }

  const auto g_h = load_checkpoint(f.heightmap_model, ModelRole::heightmap_generator);
  const int k = g_h.generator_spec().latent_dim;
  const auto latents = sample_latent(k, req.count, req.seed);
  prepare_out(f.shared, cfg);
  const fs::path out = f.shared.out;

  std::vector<Image> heightmaps;
  std::vector<Image> textures;
  if (req.emit_texture) {
    const auto g_t = load_checkpoint(*f.texture_model, ModelRole::texture_generator);
    for (auto& pair : generate_pairs(g_h, g_t, latents, req.blur_radius_px)) {
      heightmaps.push_back(std::move(pair.heightmap));
      textures.push_back(std::move(pair.texture));
    }
  } else {
    heightmaps = generate_heightmaps(g_h, latents);
    for (auto& h : heightmaps) h = gaussian_blur(h, req.blur_radius_px);
  }

  nlohmann::json samples = nlohmann::json::array();
  for (std::size_t i = 0; i < heightmaps.size(); ++i) {
    nlohmann::json sample{{"index", i}, {"heightmap", numbered("heightmap", i)}};
    write_heightmap_png16(heightmaps[i], out / numbered("heightmap", i));
    if (req.emit_texture) {
      write_texture_png(textures[i], out / numbered("texture", i));
      sample["texture"] = numbered("texture", i);
    }
    samples.push_back(sample);
  }
  write_json(out / "seeds.json", {{"seed", req.seed},
                                  {"latent_dim", k},
                                  {"count", req.count},
                                  {"prior", "standard_normal"},
                                  {"blur_radius_px", req.blur_radius_px},
                                  {"samples", samples}});

  if (grid) {
    if (req.emit_texture) {
      std::vector<Image> cells;
      for (std::size_t i = 0; i < heightmaps.size(); ++i) cells.push_back(side_by_side(heightmaps[i], textures[i]));
      write_texture_png(montage(cells, grid->first, grid->second), out / "montage.png");
    } else {
      write_heightmap_png16(montage(heightmaps, grid->first, grid->second), out / "montage.png");
    }
  }
  std::printf("wrote %zu heightmaps%s to %s\n", heightmaps.size(), req.emit_texture ? " and textures" : "",
              out.c_str());
  return 0;
}

struct InterpolateFlags {
  SharedFlags shared;
  std::string heightmap_model;
  std::optional<std::string> latents;
  int steps = 8;
  std::string layout = "strip";
  std::optional<double> blur;
};

LatentVector latent_from_json(const nlohmann::json& j) {
  LatentVector z;
  z.values = j.get<std::vector<float>>();
  return z;
}

int run_interpolate(const InterpolateFlags& f) {
  RunConfig cfg = base_config(f.shared, "interpolate");
  override_with(cfg.generation.blur_radius_px, f.blur);
  cfg.generation.validate();
  require_file(f.heightmap_model, "heightmap generator checkpoint");
  cfg.inputs["heightmap_model"] = f.heightmap_model;
  cfg.inputs["steps"] = std::to_string(f.steps);
  cfg.inputs["layout"] = f.layout;
  if (f.steps < 2) throw UsageError("--steps must be >= 2");

  const auto g_h = load_checkpoint(f.heightmap_model, ModelRole::heightmap_generator);
  const int k = g_h.generator_spec().latent_dim;
  LatentVector z1;
  LatentVector z2;
  if (f.latents) {
    require_file(*f.latents, "latent file");
    cfg.inputs["latents"] = *f.latents;
    std::ifstream in(*f.latents);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
      z1 = latent_from_json(j.at("z1"));
      z2 = latent_from_json(j.at("z2"));
    } catch (const nlohmann::json::exception& e) {
      throw UsageError(std::string("latent file must hold {\"z1\": [...], \"z2\": [...]}: ") + e.what());
    }
    if (z1.k() != k || z2.k() != k) throw UsageError("latents must have " + std::to_string(k) + " values");
  } else {
    const auto pair = sample_latent(k, 2, cfg.seed);
    z1 = pair[0];
    z2 = pair[1];
  }

  const bool grid = f.layout == "grid";
  const int frames = grid ? f.steps * f.steps : f.steps;
  const auto path = interpolate_latents(z1, z2, frames);
  auto decoded = generate_heightmaps(g_h, path);
  for (auto& h : decoded) h = gaussian_blur(h, cfg.generation.blur_radius_px);

  prepare_out(f.shared, cfg);
  const fs::path out = f.shared.out;
  for (std::size_t i = 0; i < decoded.size(); ++i) write_heightmap_png16(decoded[i], out / numbered("frame", i));
  write_heightmap_png16(montage(decoded, grid ? f.steps : 1, f.steps), out / "interpolation.png");
  write_json(out / "latents.json", {{"z1", z1.values}, {"z2", z2.values}});
  std::printf("wrote %d frames and %s\n", frames, (out / "interpolation.png").c_str());
  return 0;
}

// ---------------------------------------------------------------- export/baseline

struct ExportFlags {
  SharedFlags shared;
  std::string input;
  std::string format;
  std::optional<double> horizontal_scale, vertical_scale;
};

int run_export(const ExportFlags& f) {
  RunConfig cfg = base_config(f.shared, "export");
  override_with(cfg.mesh.horizontal_scale, f.horizontal_scale);
  override_with(cfg.mesh.vertical_scale, f.vertical_scale);
  cfg.mesh.validate();
  require_file(f.input, "input heightmap");
  cfg.inputs["input"] = f.input;
  cfg.inputs["format"] = f.format;

  const Image heightmap = read_heightmap_png16(f.input);
  prepare_out(f.shared, cfg);
  const fs::path out = fs::path(f.shared.out) / fs::path(f.input).stem();
  if (f.format == "png16") {
    write_heightmap_png16(heightmap, out.string() + ".png");
    std::printf("wrote %s.png\n", out.c_str());
  } else if (f.format == "raw") {
    const auto report = write_unity_raw(heightmap, out.string() + ".raw");
    for (const auto& w : report.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    std::printf("wrote %s.raw (%dx%d, 16-bit little-endian)\n", out.c_str(), heightmap.width, heightmap.height);
  } else {
    const auto stats = heightmap_to_obj(heightmap, cfg.mesh, out.string() + ".obj");
    std::printf("wrote %s.obj (%zu vertices, %zu faces)\n", out.c_str(), stats.vertices, stats.faces);
  }
  return 0;
}

struct BaselineFlags {
  SharedFlags shared;
  int exponent = 5;
  double roughness = 0.5;
  std::vector<double> corners = {0.5, 0.5, 0.5, 0.5};
};

int run_baseline(const BaselineFlags& f) {
  RunConfig cfg = base_config(f.shared, "baseline");
  DiamondSquareConfig ds;
  ds.exponent = f.exponent;
  ds.roughness = f.roughness;
  if (f.corners.size() != 4) throw UsageError("--corners takes four values");
  std::copy(f.corners.begin(), f.corners.end(), ds.corner_values.begin());
  ds.seed = cfg.seed;
  ds.validate();
  cfg.inputs["exponent"] = std::to_string(f.exponent);
  {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%.17g", f.roughness);
    cfg.inputs["roughness"] = buf;
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g", f.corners[0], f.corners[1], f.corners[2], f.corners[3]);
    cfg.inputs["corners"] = buf;
  }
  const Image heightmap = diamond_square(ds);
  prepare_out(f.shared, cfg);
  const fs::path out = fs::path(f.shared.out) / "baseline.png";
  write_heightmap_png16(to_model_range(heightmap), out);
  std::printf("wrote %s (%dx%d)\n", out.c_str(), heightmap.width, heightmap.height);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"terragan: procedural terrain with a heightmap GAN and a heightmap-to-texture GAN"};
  app.require_subcommand(1);

  PrepareFlags prepare;
  auto* prepare_cmd = app.add_subcommand("prepare-data", "Tile, filter and rank a world raster pair into a dataset");
  add_shared(prepare_cmd, prepare.shared);
  prepare_cmd->add_option("--heightmap", prepare.heightmap, "World heightmap raster (PNG/JPEG)")->required();
  prepare_cmd->add_option("--texture", prepare.texture, "World texture raster (PNG/JPEG)")->required();
  auto* ref_opt = prepare_cmd->add_option("--reference", prepare.reference, "Reference texture image (tile size)");
  prepare_cmd->add_option("--reference-tile", prepare.reference_tile, "Use the world texture tile at X Y as reference")
      ->expected(2)
      ->excludes(ref_opt);
  prepare_cmd->add_option("--tile-size", prepare.tile_size, "Window size in pixels (512)");
  prepare_cmd->add_option("--stride", prepare.stride, "Window stride in pixels (512)");
  prepare_cmd->add_option("--max-black", prepare.max_black, "Keep tiles with black fraction below this (0.9)");
  prepare_cmd->add_option("--black-threshold", prepare.black_threshold, "Intensity below which a pixel is black (0.05)");
  prepare_cmd->add_option("--top-m", prepare.top_m, "Number of tiles closest to the reference to keep");
  prepare_cmd->add_option("--val-fraction", prepare.val_fraction, "Fraction of kept tiles assigned to val (0.1)");

  TrainFlags train_h;
  TrainFlags train_t;
  auto add_train = [&](const char* name, const char* help, TrainFlags& t, bool texture) {
    auto* cmd = app.add_subcommand(name, help);
    add_shared(cmd, t.shared);
    cmd->add_option("--manifest", t.manifest, "Dataset manifest (manifest.jsonl)")->required();
    cmd->add_option("--steps", t.steps, "Total training steps");
    cmd->add_option("--batch-size", t.batch_size, "Batch size (16)");
    cmd->add_option("--lr", t.lr, "RMSProp learning rate (1e-4)");
    cmd->add_option("--resolution", t.resolution, "Training resolution in pixels (32)");
    cmd->add_option("--checkpoint-every", t.checkpoint_every, "Write checkpoints every N steps (0: only at the end)");
    cmd->add_option("--gen-channels", t.gen_channels, "Generator base channel width (32)");
    cmd->add_option("--disc-channels", t.disc_channels, "Discriminator base channel width (32)");
    cmd->add_option("--loss", t.loss, "Adversarial loss")->check(CLI::IsMember({"least_squares", "cross_entropy"}));
    if (texture) {
      cmd->add_option("--lambda", t.lambda, "Reconstruction weight (100)");
      cmd->add_option("--distance", t.distance, "Reconstruction distance")->check(CLI::IsMember({"L1", "L2"}));
    } else {
      cmd->add_option("--latent-dim", t.latent_dim, "Latent dimension k (100)");
    }
    cmd->add_flag("--resume", t.resume, "Continue from the checkpoints in --out");
    return cmd;
  };
  auto* train_h_cmd = add_train("train-heightmap", "Train the noise-to-heightmap GAN", train_h, false);
  auto* train_t_cmd = add_train("train-texture", "Train the heightmap-to-texture GAN", train_t, true);

  GenerateFlags generate;
  auto* generate_cmd = app.add_subcommand("generate", "Sample heightmaps and their textures");
  add_shared(generate_cmd, generate.shared);
  generate_cmd->add_option("--heightmap-model", generate.heightmap_model, "G_h checkpoint")->required();
  generate_cmd->add_option("--texture-model", generate.texture_model, "G_t checkpoint");
  generate_cmd->add_option("--n", generate.count, "Number of samples (1)");
  generate_cmd->add_option("--blur", generate.blur, "Gaussian blur sigma in pixels before texturing (0.4)");
  generate_cmd->add_option("--montage", generate.montage_grid, "Also write an RxC montage, e.g. 3x3");
  generate_cmd->add_flag("--no-texture", generate.no_texture, "Emit heightmaps only");

  InterpolateFlags interpolate;
  auto* interpolate_cmd = app.add_subcommand("interpolate", "Decode a linear path between two latents");
  add_shared(interpolate_cmd, interpolate.shared);
  interpolate_cmd->add_option("--heightmap-model", interpolate.heightmap_model, "G_h checkpoint")->required();
  interpolate_cmd->add_option("--latents", interpolate.latents, "JSON file with endpoint latents z1, z2");
  interpolate_cmd->add_option("--steps", interpolate.steps, "Frames per row")->capture_default_str();
  interpolate_cmd->add_option("--layout", interpolate.layout, "strip (1 x steps) or grid (steps x steps)")
      ->check(CLI::IsMember({"strip", "grid"}))
      ->capture_default_str();
  interpolate_cmd->add_option("--blur", interpolate.blur, "Gaussian blur sigma in pixels (0.4)");

  ExportFlags exporter;
  auto* export_cmd = app.add_subcommand("export", "Convert a 16-bit heightmap PNG for game engines");
  add_shared(export_cmd, exporter.shared);
  export_cmd->add_option("--input", exporter.input, "16-bit grayscale heightmap PNG")->required();
  export_cmd->add_option("--format", exporter.format, "png16, raw or obj")
      ->required()
      ->check(CLI::IsMember({"png16", "raw", "obj"}));
  export_cmd->add_option("--horizontal-scale", exporter.horizontal_scale, "Meters per pixel (1000)");
  export_cmd->add_option("--vertical-scale", exporter.vertical_scale, "Meters at full intensity (4000)");

  BaselineFlags baseline;
  auto* baseline_cmd = app.add_subcommand("baseline", "Diamond-square heightmap");
  add_shared(baseline_cmd, baseline.shared);
  baseline_cmd->add_option("--n", baseline.exponent, "Grid exponent: side is 2^n + 1")->capture_default_str();
  baseline_cmd->add_option("--roughness", baseline.roughness, "Initial displacement amplitude")->capture_default_str();
  baseline_cmd->add_option("--corners", baseline.corners, "Four corner values in [0,1]")->expected(4);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*prepare_cmd) return run_prepare(prepare);
    if (*train_h_cmd) return run_train(train_h, ModelKind::heightmap);
    if (*train_t_cmd) return run_train(train_t, ModelKind::texture);
    if (*generate_cmd) return run_generate(generate);
    if (*interpolate_cmd) return run_interpolate(interpolate);
    if (*export_cmd) return run_export(exporter);
    if (*baseline_cmd) return run_baseline(baseline);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsageError;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kUsageError;
  } catch (const InvalidInput& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kUsageError;
  } catch (const ResumeError& e) {
    std::fprintf(stderr, "cannot resume: %s\n", e.what());
    return kRuntimeFailure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntimeFailure;
  }
  return kUsageError;
}
