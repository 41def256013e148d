#include "terragan/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace terragan {
namespace {

using nlohmann::json;

void reject_unknown(const json& object, const std::set<std::string>& allowed, const std::string& where) {
  if (!object.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : object.items()) {
    if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& object, const char* key, T& target, const std::string& where) {
  if (!object.contains(key)) return;
  try {
    target = object.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("wrong type for '" + std::string(key) + "' in " + where);
  }
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config JSON: ") + e.what());
  }
  reject_unknown(root, {"command", "inputs", "seed", "filter", "training", "loss", "generation", "mesh"}, "config");

  RunConfig cfg;
  read(root, "command", cfg.command, "config");
  read(root, "inputs", cfg.inputs, "config");
  read(root, "seed", cfg.seed, "config");

  if (root.contains("filter")) {
    const auto& j = root["filter"];
    reject_unknown(j, {"tile_size", "stride", "max_black_fraction", "black_intensity_threshold", "top_m",
                       "val_fraction"},
                   "filter");
    read(j, "tile_size", cfg.filter.tile_size, "filter");
    read(j, "stride", cfg.filter.stride, "filter");
    read(j, "max_black_fraction", cfg.filter.max_black_fraction, "filter");
    read(j, "black_intensity_threshold", cfg.filter.black_intensity_threshold, "filter");
    read(j, "top_m", cfg.filter.top_m, "filter");
    read(j, "val_fraction", cfg.filter.val_fraction, "filter");
  }
  if (root.contains("training")) {
    const auto& j = root["training"];
    reject_unknown(j, {"optimizer", "learning_rate", "rmsprop_alpha", "rmsprop_epsilon", "batch_size", "total_steps",
                       "checkpoint_every", "resolution", "latent_dim", "generator_channels",
                       "discriminator_channels"},
                   "training");
    std::string optimizer = "RMSProp";
    read(j, "optimizer", optimizer, "training");
    if (optimizer != "RMSProp") throw ConfigError("unsupported optimizer '" + optimizer + "' (only RMSProp)");
    read(j, "learning_rate", cfg.training.optimizer.learning_rate, "training");
    read(j, "rmsprop_alpha", cfg.training.optimizer.alpha, "training");
    read(j, "rmsprop_epsilon", cfg.training.optimizer.epsilon, "training");
    read(j, "batch_size", cfg.training.batch_size, "training");
    read(j, "total_steps", cfg.training.total_steps, "training");
    read(j, "checkpoint_every", cfg.training.checkpoint_every, "training");
    read(j, "resolution", cfg.training.resolution, "training");
    read(j, "latent_dim", cfg.training.latent_dim, "training");
    read(j, "generator_channels", cfg.training.generator_channels, "training");
    read(j, "discriminator_channels", cfg.training.discriminator_channels, "training");
  }
  if (root.contains("loss")) {
    const auto& j = root["loss"];
    reject_unknown(j, {"variant", "lambda", "distance"}, "loss");
    std::string variant = to_string(cfg.training.loss.variant);
    std::string distance = to_string(cfg.training.loss.distance);
    read(j, "variant", variant, "loss");
    read(j, "distance", distance, "loss");
    read(j, "lambda", cfg.training.loss.lambda, "loss");
    try {
      cfg.training.loss.variant = variant_from_string(variant);
      cfg.training.loss.distance = distance_from_string(distance);
    } catch (const InvalidInput& e) {
      throw ConfigError(e.what());
    }
  }
  if (root.contains("generation")) {
    const auto& j = root["generation"];
    reject_unknown(j, {"count", "blur_radius_px", "emit_texture"}, "generation");
    read(j, "count", cfg.generation.count, "generation");
    read(j, "blur_radius_px", cfg.generation.blur_radius_px, "generation");
    read(j, "emit_texture", cfg.generation.emit_texture, "generation");
  }
  if (root.contains("mesh")) {
    const auto& j = root["mesh"];
    reject_unknown(j, {"horizontal_scale", "vertical_scale"}, "mesh");
    read(j, "horizontal_scale", cfg.mesh.horizontal_scale, "mesh");
    read(j, "vertical_scale", cfg.mesh.vertical_scale, "mesh");
  }
  cfg.training.seed = cfg.seed;
  cfg.generation.seed = cfg.seed;
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str());
}

std::string dump_run_config(const RunConfig& cfg) {
  const auto& t = cfg.training;
  const json root{
      {"command", cfg.command},
      {"inputs", cfg.inputs},
      {"seed", cfg.seed},
      {"filter",
       {{"tile_size", cfg.filter.tile_size},
        {"stride", cfg.filter.stride},
        {"max_black_fraction", cfg.filter.max_black_fraction},
        {"black_intensity_threshold", cfg.filter.black_intensity_threshold},
        {"top_m", cfg.filter.top_m},
        {"val_fraction", cfg.filter.val_fraction}}},
      {"training",
       {{"optimizer", "RMSProp"},
        {"learning_rate", t.optimizer.learning_rate},
        {"rmsprop_alpha", t.optimizer.alpha},
        {"rmsprop_epsilon", t.optimizer.epsilon},
        {"batch_size", t.batch_size},
        {"total_steps", t.total_steps},
        {"checkpoint_every", t.checkpoint_every},
        {"resolution", t.resolution},
        {"latent_dim", t.latent_dim},
        {"generator_channels", t.generator_channels},
        {"discriminator_channels", t.discriminator_channels}}},
      {"loss",
       {{"variant", to_string(t.loss.variant)}, {"lambda", t.loss.lambda}, {"distance", to_string(t.loss.distance)}}},
      {"generation",
       {{"count", cfg.generation.count},
        {"blur_radius_px", cfg.generation.blur_radius_px},
        {"emit_texture", cfg.generation.emit_texture}}},
      {"mesh", {{"horizontal_scale", cfg.mesh.horizontal_scale}, {"vertical_scale", cfg.mesh.vertical_scale}}}};
  return root.dump(2) + "\n";
}

void write_run_config(const RunConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write config " + path.string());
  out << dump_run_config(config);
}

}  // namespace terragan
