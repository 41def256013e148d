#include "terragan/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "terragan/image.hpp"

namespace terragan {
namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'T', 'E', 'R', 'R', 'A', 'G', 'A', 'N'};

static_assert(std::endian::native == std::endian::little, "checkpoint blobs are written in host order");

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

json spec_to_json(const GeneratorSpec& s) {
  return json{{"type", "generator"},
              {"kind", to_string(s.kind)},
              {"output_resolution", s.output_resolution},
              {"base_channels", s.base_channels},
              {"depth", s.depth},
              {"output_channels", s.output_channels},
              {"skip_connections", s.skip_connections},
              {"latent_dim", s.latent_dim}};
}

json spec_to_json(const DiscriminatorSpec& s) {
  return json{{"type", "discriminator"},
              {"kind", to_string(s.kind)},
              {"input_resolution", s.input_resolution},
              {"base_channels", s.base_channels},
              {"depth", s.depth},
              {"input_channels", s.input_channels},
              {"output", "linear"}};
}

std::variant<GeneratorSpec, DiscriminatorSpec> spec_from_json(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "generator") {
    GeneratorSpec s;
    s.kind = model_kind_from_string(j.at("kind").get<std::string>());
    s.output_resolution = j.at("output_resolution").get<int>();
    s.base_channels = j.at("base_channels").get<int>();
    s.depth = j.at("depth").get<int>();
    s.output_channels = j.at("output_channels").get<int>();
    s.skip_connections = j.at("skip_connections").get<bool>();
    s.latent_dim = j.at("latent_dim").get<int>();
    s.validate();
    return s;
  }
  if (type == "discriminator") {
    DiscriminatorSpec s;
    s.kind = model_kind_from_string(j.at("kind").get<std::string>());
    s.input_resolution = j.at("input_resolution").get<int>();
    s.base_channels = j.at("base_channels").get<int>();
    s.depth = j.at("depth").get<int>();
    s.input_channels = j.at("input_channels").get<int>();
    s.validate();
    return s;
  }
  throw CheckpointError("unknown spec type '" + type + "'");
}

bool role_matches_spec(ModelRole role, const std::variant<GeneratorSpec, DiscriminatorSpec>& spec) {
  switch (role) {
    case ModelRole::heightmap_generator:
      return std::holds_alternative<GeneratorSpec>(spec) && std::get<GeneratorSpec>(spec).kind == ModelKind::heightmap;
    case ModelRole::texture_generator:
      return std::holds_alternative<GeneratorSpec>(spec) && std::get<GeneratorSpec>(spec).kind == ModelKind::texture;
    case ModelRole::heightmap_discriminator:
      return std::holds_alternative<DiscriminatorSpec>(spec) &&
             std::get<DiscriminatorSpec>(spec).kind == ModelKind::heightmap;
    case ModelRole::texture_discriminator:
      return std::holds_alternative<DiscriminatorSpec>(spec) &&
             std::get<DiscriminatorSpec>(spec).kind == ModelKind::texture;
  }
  return false;
}

template <typename T>
void write_le(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(value));
}

template <typename T>
T read_le(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(value));
  if (!in) throw CheckpointError("truncated checkpoint");
  return value;
}

}  // namespace

std::string to_string(ModelKind kind) { return kind == ModelKind::heightmap ? "heightmap" : "texture"; }

ModelKind model_kind_from_string(const std::string& text) {
  if (text == "heightmap") return ModelKind::heightmap;
  if (text == "texture") return ModelKind::texture;
  throw InvalidInput("unknown model kind '" + text + "'");
}

std::string to_string(ModelRole role) {
  switch (role) {
    case ModelRole::heightmap_generator: return "heightmap_generator";
    case ModelRole::heightmap_discriminator: return "heightmap_discriminator";
    case ModelRole::texture_generator: return "texture_generator";
    case ModelRole::texture_discriminator: return "texture_discriminator";
  }
  return "unknown";
}

ModelRole model_role_from_string(const std::string& text) {
  for (auto role : {ModelRole::heightmap_generator, ModelRole::heightmap_discriminator, ModelRole::texture_generator,
                    ModelRole::texture_discriminator}) {
    if (to_string(role) == text) return role;
  }
  throw CheckpointError("unknown model role '" + text + "'");
}

GeneratorSpec GeneratorSpec::heightmap(int resolution, int base_channels, int latent_dim) {
  GeneratorSpec s;
  s.kind = ModelKind::heightmap;
  s.output_resolution = resolution;
  s.base_channels = base_channels;
  s.depth = resolution >= 8 ? std::bit_width(static_cast<unsigned>(resolution / 4)) - 1 : 0;
  s.output_channels = 1;
  s.skip_connections = false;
  s.latent_dim = latent_dim;
  s.validate();
  return s;
}

GeneratorSpec GeneratorSpec::texture(int resolution, int base_channels) {
  GeneratorSpec s;
  s.kind = ModelKind::texture;
  s.output_resolution = resolution;
  s.base_channels = base_channels;
  s.depth = resolution >= 8 ? std::bit_width(static_cast<unsigned>(resolution / 4)) - 1 : 0;
  s.output_channels = 3;
  s.skip_connections = true;
  s.latent_dim = 0;
  s.validate();
  return s;
}

void GeneratorSpec::validate() const {
  if (!is_power_of_two(output_resolution)) throw InvalidInput("generator resolution must be a power of two");
  if (base_channels < 1) throw InvalidInput("generator base_channels must be >= 1");
  if (depth < 1 || depth > 12) throw InvalidInput("generator depth must lie in [1,12]");
  if (kind == ModelKind::heightmap) {
    if (output_resolution != 4 * (1 << depth)) {
      throw InvalidInput("heightmap generator needs output_resolution = 4 * 2^depth");
    }
    if (output_channels != 1) throw InvalidInput("heightmap generator outputs one channel");
    if (latent_dim < 1) throw InvalidInput("latent_dim must be >= 1");
  } else {
    if (output_channels != 3) throw InvalidInput("texture generator outputs three channels");
    if (!skip_connections) throw InvalidInput("texture generator requires skip connections");
    if (output_resolution % (1 << depth) != 0) throw InvalidInput("texture generator resolution too small for depth");
  }
}

DiscriminatorSpec DiscriminatorSpec::heightmap(int resolution, int base_channels) {
  DiscriminatorSpec s;
  s.kind = ModelKind::heightmap;
  s.input_resolution = resolution;
  s.base_channels = base_channels;
  s.depth = resolution >= 8 ? std::bit_width(static_cast<unsigned>(resolution / 4)) - 1 : 0;
  s.input_channels = 1;
  s.validate();
  return s;
}

DiscriminatorSpec DiscriminatorSpec::texture(int resolution, int base_channels) {
  DiscriminatorSpec s = heightmap(resolution, base_channels);
  s.kind = ModelKind::texture;
  s.input_channels = 4;
  s.validate();
  return s;
}

void DiscriminatorSpec::validate() const {
  if (!is_power_of_two(input_resolution)) throw InvalidInput("discriminator resolution must be a power of two");
  if (base_channels < 1) throw InvalidInput("discriminator base_channels must be >= 1");
  if (depth < 1 || depth > 12) throw InvalidInput("discriminator depth must lie in [1,12]");
  if (input_resolution % (1 << depth) != 0) throw InvalidInput("discriminator resolution too small for depth");
  const int expected_channels = kind == ModelKind::heightmap ? 1 : 4;
  if (input_channels != expected_channels) {
    throw InvalidInput("discriminator of kind " + to_string(kind) + " takes " + std::to_string(expected_channels) +
                       " input channels");
  }
}

const GeneratorSpec& ModelCheckpoint::generator_spec() const {
  if (const auto* s = std::get_if<GeneratorSpec>(&spec)) return *s;
  throw CheckpointError("checkpoint holds a discriminator, not a generator");
}

const DiscriminatorSpec& ModelCheckpoint::discriminator_spec() const {
  if (const auto* s = std::get_if<DiscriminatorSpec>(&spec)) return *s;
  throw CheckpointError("checkpoint holds a generator, not a discriminator");
}

std::string hash_to_hex(std::uint64_t hash) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

void save_checkpoint(const ModelCheckpoint& checkpoint, const std::filesystem::path& path) {
  if (!role_matches_spec(checkpoint.role, checkpoint.spec)) {
    throw CheckpointError("checkpoint role " + to_string(checkpoint.role) + " does not match its spec");
  }
  json index = json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, blob] : checkpoint.tensors) {
    std::int64_t count = 1;
    for (auto d : blob.shape) count *= d;
    if (count != static_cast<std::int64_t>(blob.values.size())) {
      throw CheckpointError("tensor '" + name + "' shape does not match its value count");
    }
    index.push_back(json{{"name", name}, {"shape", blob.shape}, {"offset", offset}, {"count", count}});
    offset += static_cast<std::uint64_t>(count);
  }
  const json header{{"role", to_string(checkpoint.role)},
                    {"spec", std::visit([](const auto& s) { return spec_to_json(s); }, checkpoint.spec)},
                    {"training_step", checkpoint.training_step},
                    {"normalization", checkpoint.normalization},
                    {"config_hash", hash_to_hex(checkpoint.config_hash)},
                    {"dtype", "float32-le"},
                    {"tensors", index}};
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof(kMagic));
  write_le<std::uint32_t>(out, kCheckpointVersion);
  write_le<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [name, blob] : checkpoint.tensors) {
    out.write(reinterpret_cast<const char*>(blob.values.data()),
              static_cast<std::streamsize>(blob.values.size() * sizeof(float)));
  }
  if (!out) throw CheckpointError("failed writing checkpoint " + path.string());
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  char magic[sizeof(kMagic)] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError(path.string() + " is not a terragan checkpoint");
  }
  const auto version = read_le<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version) + " in " + path.string() +
                          " (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  const auto header_size = read_le<std::uint64_t>(in);
  if (header_size > (1u << 26)) throw CheckpointError("corrupt checkpoint header in " + path.string());
  std::string text(header_size, '\0');
  in.read(text.data(), static_cast<std::streamsize>(header_size));
  if (!in) throw CheckpointError("truncated checkpoint " + path.string());

  ModelCheckpoint checkpoint;
  try {
    const json header = json::parse(text);
    checkpoint.role = model_role_from_string(header.at("role").get<std::string>());
    checkpoint.spec = spec_from_json(header.at("spec"));
    checkpoint.training_step = header.at("training_step").get<std::int64_t>();
    checkpoint.normalization = header.at("normalization").get<std::string>();
    checkpoint.config_hash = std::stoull(header.at("config_hash").get<std::string>(), nullptr, 16);
    if (header.value("dtype", std::string()) != "float32-le") throw CheckpointError("unsupported blob dtype");
    for (const auto& entry : header.at("tensors")) {
      TensorBlob blob;
      blob.shape = entry.at("shape").get<std::vector<std::int64_t>>();
      const auto count = entry.at("count").get<std::int64_t>();
      if (count < 0 || count > (std::int64_t{1} << 32)) throw CheckpointError("corrupt tensor index");
      blob.values.resize(static_cast<std::size_t>(count));
      in.read(reinterpret_cast<char*>(blob.values.data()), static_cast<std::streamsize>(count * sizeof(float)));
      if (!in) throw CheckpointError("truncated tensor data in " + path.string());
      checkpoint.tensors.emplace(entry.at("name").get<std::string>(), std::move(blob));
    }
  } catch (const json::exception& e) {
    throw CheckpointError("corrupt checkpoint header in " + path.string() + ": " + e.what());
  } catch (const InvalidInput& e) {
    throw CheckpointError("invalid spec in " + path.string() + ": " + e.what());
  }
  if (!role_matches_spec(checkpoint.role, checkpoint.spec)) {
    throw CheckpointError("checkpoint role does not match its spec in " + path.string());
  }
  return checkpoint;
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& path, ModelRole expected) {
  ModelCheckpoint checkpoint = load_checkpoint(path);
  if (checkpoint.role != expected) {
    throw CheckpointError(path.string() + " holds a " + to_string(checkpoint.role) + ", expected a " +
                          to_string(expected));
  }
  return checkpoint;
}

}  // namespace terragan
