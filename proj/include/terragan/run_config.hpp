#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>

#include "terragan/export.hpp"
#include "terragan/generation.hpp"
#include "terragan/training.hpp"

namespace terragan {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dataset preparation settings as they appear in a run configuration; the
/// reference texture itself is named under "inputs".
struct FilterSettings {
  int tile_size = 512;
  int stride = 512;
  double max_black_fraction = 0.9;
  double black_intensity_threshold = 0.05;
  int top_m = 1000;
  double val_fraction = 0.1;
};

/// Everything a CLI command needs to run. Serialized as JSON with sections
/// "filter", "training", "loss", "generation", "mesh" plus "seed", and the
/// free-form "command"/"inputs" that make an echoed config rerunnable.
struct RunConfig {
  std::string command;
  std::map<std::string, std::string> inputs;
  std::uint64_t seed = 0;
  FilterSettings filter;
  TrainingConfig training;  // training.loss is the "loss" section
  GenerationRequest generation;
  MeshConfig mesh;
};

/// Strict parse: unknown keys or wrong types raise ConfigError. Missing keys
/// keep their defaults.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

std::string dump_run_config(const RunConfig& config);
void write_run_config(const RunConfig& config, const std::filesystem::path& path);

}  // namespace terragan
