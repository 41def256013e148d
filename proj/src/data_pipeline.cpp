#include "terragan/data_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "terragan/raster_io.hpp"
#include "terragan/rng.hpp"

namespace terragan {
namespace {

using nlohmann::json;

constexpr int kManifestVersion = 1;

bool ranks_before(const ManifestEntry& a, const ManifestEntry& b) {
  return std::tie(*a.ref_distance, a.id) < std::tie(*b.ref_distance, b.id);
}

ManifestEntry entry_for(const TilePair& tile) {
  ManifestEntry e;
  e.id = tile.id;
  e.origin_x = tile.origin_x;
  e.origin_y = tile.origin_y;
  e.size = tile.size;
  e.black_fraction = tile.black_fraction;
  e.ref_distance = tile.ref_distance;
  return e;
}

// Sorts by (ref_distance, id) and truncates to m.
void keep_top_m(std::vector<ManifestEntry>& entries, int m) {
  std::sort(entries.begin(), entries.end(), ranks_before);
  if (entries.size() > static_cast<std::size_t>(m)) entries.resize(static_cast<std::size_t>(m));
}

json provenance_to_json(const ManifestProvenance& p) {
  return json{{"version", kManifestVersion},
              {"tile_size", p.tile_size},
              {"stride", p.stride},
              {"max_black_fraction", p.max_black_fraction},
              {"black_intensity_threshold", p.black_intensity_threshold},
              {"top_m", p.top_m},
              {"val_fraction", p.val_fraction},
              {"split_seed", p.split_seed},
              {"source_checksums", p.source_checksums},
              {"reference_checksum", p.reference_checksum}};
}

ManifestProvenance provenance_from_json(const json& j) {
  if (j.value("version", 0) != kManifestVersion) {
    throw DatasetError("unsupported manifest version " + j.value("version", json()).dump());
  }
  ManifestProvenance p;
  p.tile_size = j.at("tile_size").get<int>();
  p.stride = j.at("stride").get<int>();
  p.max_black_fraction = j.at("max_black_fraction").get<double>();
  p.black_intensity_threshold = j.at("black_intensity_threshold").get<double>();
  p.top_m = j.at("top_m").get<int>();
  p.val_fraction = j.value("val_fraction", 0.0);
  p.split_seed = j.value("split_seed", std::uint64_t{0});
  p.source_checksums = j.at("source_checksums").get<std::map<std::string, std::string>>();
  p.reference_checksum = j.value("reference_checksum", std::string());
  return p;
}

json entry_to_json(const ManifestEntry& e) {
  return json{{"id", e.id},
              {"origin_x", e.origin_x},
              {"origin_y", e.origin_y},
              {"size", e.size},
              {"black_fraction", e.black_fraction},
              {"ref_distance", e.ref_distance ? json(*e.ref_distance) : json(nullptr)},
              {"split", to_string(e.split)},
              {"heightmap_path", e.heightmap_path},
              {"texture_path", e.texture_path}};
}

ManifestEntry entry_from_json(const json& j) {
  ManifestEntry e;
  e.id = j.at("id").get<std::string>();
  e.origin_x = j.at("origin_x").get<int>();
  e.origin_y = j.at("origin_y").get<int>();
  e.size = j.at("size").get<int>();
  e.black_fraction = j.at("black_fraction").get<double>();
  if (!j.at("ref_distance").is_null()) e.ref_distance = j.at("ref_distance").get<double>();
  e.split = split_from_string(j.at("split").get<std::string>());
  e.heightmap_path = j.at("heightmap_path").get<std::string>();
  e.texture_path = j.at("texture_path").get<std::string>();
  return e;
}

}  // namespace

WorldImagePair WorldImagePair::load(const std::filesystem::path& heightmap_path,
                                    const std::filesystem::path& texture_path) {
  WorldImagePair world;
  world.heightmap = to_grayscale(read_image(heightmap_path));
  world.texture = read_image(texture_path);
  if (world.texture.channels == 1) {
    Image rgb(world.texture.height, world.texture.width, 3);
    for (std::size_t i = 0; i < world.texture.pixel_count(); ++i) {
      for (int c = 0; c < 3; ++c) rgb.data[i * 3 + c] = world.texture.data[i];
    }
    world.texture = std::move(rgb);
  }
  world.validate();
  return world;
}

void WorldImagePair::validate() const {
  if (heightmap.channels != 1) throw InvalidInput("world heightmap must have one channel");
  if (texture.channels != 3) throw InvalidInput("world texture must have three channels");
  if (heightmap.height != texture.height || heightmap.width != texture.width) {
    throw InvalidInput("world heightmap and texture dimensions differ");
  }
}

void FilterConfig::validate() const {
  if (tile_size < 1) throw InvalidInput("tile_size must be >= 1");
  if (stride < 1) throw InvalidInput("stride must be >= 1");
  if (!(max_black_fraction >= 0.0 && max_black_fraction <= 1.0)) {
    throw InvalidInput("max_black_fraction must lie in [0,1]");
  }
  if (!(black_intensity_threshold >= 0.0 && black_intensity_threshold <= 1.0)) {
    throw InvalidInput("black_intensity_threshold must lie in [0,1]");
  }
  if (top_m < 1) throw InvalidInput("top_m must be >= 1");
}

std::string to_string(Split split) { return split == Split::train ? "train" : "val"; }

Split split_from_string(const std::string& text) {
  if (text == "train") return Split::train;
  if (text == "val") return Split::val;
  throw InvalidInput("unknown split tag '" + text + "'");
}

std::string tile_id(int origin_y, int origin_x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "y%06d_x%06d", origin_y, origin_x);
  return buf;
}

std::vector<TileOrigin> tile_origins(int height, int width, int tile_size, int stride) {
  if (tile_size < 1 || stride < 1) throw InvalidInput("tile_size and stride must be >= 1");
  if (tile_size > height || tile_size > width) throw InvalidInput("tile_size exceeds raster dimensions");
  std::vector<TileOrigin> origins;
  origins.reserve(static_cast<std::size_t>((height - tile_size) / stride + 1) *
                  static_cast<std::size_t>((width - tile_size) / stride + 1));
  for (int y = 0; y + tile_size <= height; y += stride) {
    for (int x = 0; x + tile_size <= width; x += stride) origins.push_back({y, x});
  }
  return origins;
}

TilePair make_tile(const WorldImagePair& world, TileOrigin origin, int tile_size, double black_threshold) {
  TilePair tile;
  tile.id = tile_id(origin.y, origin.x);
  tile.origin_x = origin.x;
  tile.origin_y = origin.y;
  tile.size = tile_size;
  tile.heightmap = world.heightmap.crop(origin.y, origin.x, tile_size, tile_size);
  tile.texture = world.texture.crop(origin.y, origin.x, tile_size, tile_size);
  tile.black_fraction = black_fraction(tile.heightmap, black_threshold);
  return tile;
}

void extract_tiles(const WorldImagePair& world, int tile_size, int stride, double black_threshold,
                   const std::function<void(TilePair&&)>& sink) {
  world.validate();
  for (const TileOrigin& origin : tile_origins(world.heightmap.height, world.heightmap.width, tile_size, stride)) {
    sink(make_tile(world, origin, tile_size, black_threshold));
  }
}

std::vector<TilePair> extract_tiles(const WorldImagePair& world, int tile_size, int stride, double black_threshold) {
  std::vector<TilePair> tiles;
  extract_tiles(world, tile_size, stride, black_threshold, [&](TilePair&& t) { tiles.push_back(std::move(t)); });
  return tiles;
}

double black_fraction(const Image& heightmap, double black_threshold) {
  if (heightmap.empty()) throw InvalidInput("black_fraction: empty heightmap");
  std::size_t black = 0;
  for (float v : heightmap.data) black += v < black_threshold ? 1 : 0;
  return static_cast<double>(black) / static_cast<double>(heightmap.data.size());
}

std::vector<TilePair> filter_black(std::vector<TilePair> tiles, double max_black_fraction) {
  std::erase_if(tiles, [&](const TilePair& t) { return !(t.black_fraction < max_black_fraction); });
  return tiles;
}

double texture_distance(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw InvalidInput("texture_distance: shape mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
    sum += d * d;
  }
  return std::sqrt(sum);
}

DatasetManifest select_top_m(std::vector<TilePair>& tiles, const Image& reference, int m) {
  if (tiles.empty()) throw DatasetError("no tiles to rank: the dataset would be empty");
  if (m < 1) throw InvalidInput("top_m must be >= 1");
  DatasetManifest manifest;
  manifest.entries.reserve(tiles.size());
  for (TilePair& tile : tiles) {
    tile.ref_distance = texture_distance(tile.texture, reference);
    manifest.entries.push_back(entry_for(tile));
  }
  keep_top_m(manifest.entries, m);
  manifest.provenance.top_m = m;
  return manifest;
}

DatasetManifest split_manifest(DatasetManifest manifest, double val_fraction, std::uint64_t seed) {
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) throw InvalidInput("val_fraction must lie in [0,1)");
  const std::size_t n = manifest.entries.size();
  const auto val_count = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(n)));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Random rng(derive_seed(seed, 0x5b117));
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

  for (auto& e : manifest.entries) e.split = Split::train;
  for (std::size_t i = 0; i < val_count; ++i) manifest.entries[order[i]].split = Split::val;
  manifest.provenance.val_fraction = val_fraction;
  manifest.provenance.split_seed = seed;
  return manifest;
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DatasetError("cannot write manifest " + path.string());
  out << provenance_to_json(manifest.provenance).dump() << '\n';
  for (const auto& e : manifest.entries) out << entry_to_json(e).dump() << '\n';
  if (!out) throw DatasetError("failed writing manifest " + path.string());
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot read manifest " + path.string());
  DatasetManifest manifest;
  std::string line;
  std::size_t line_no = 0;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const json j = json::parse(line);
      if (line_no == 1) {
        manifest.provenance = provenance_from_json(j);
      } else {
        manifest.entries.push_back(entry_from_json(j));
      }
    }
  } catch (const json::exception& e) {
    throw DatasetError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
  }
  if (line_no == 0) throw DatasetError("empty manifest " + path.string());
  return manifest;
}

DatasetManifest prepare_dataset(const WorldImagePair& world, const FilterConfig& config, double val_fraction,
                                std::uint64_t seed, const std::filesystem::path& out_dir, PrepareStats* stats) {
  world.validate();
  config.validate();
  if (config.reference_texture.height != config.tile_size || config.reference_texture.width != config.tile_size ||
      config.reference_texture.channels != 3) {
    throw InvalidInput("reference texture must be tile_size x tile_size RGB");
  }

  PrepareStats local;
  // Crops are discarded after scoring so only metadata is held per tile.
  std::vector<ManifestEntry> ranked;
  for (const TileOrigin& origin :
       tile_origins(world.heightmap.height, world.heightmap.width, config.tile_size, config.stride)) {
    ++local.candidates;
    const Image heightmap = world.heightmap.crop(origin.y, origin.x, config.tile_size, config.tile_size);
    const double fraction = black_fraction(heightmap, config.black_intensity_threshold);
    if (!(fraction < config.max_black_fraction)) continue;
    ++local.after_black_filter;
    const Image texture = world.texture.crop(origin.y, origin.x, config.tile_size, config.tile_size);
    ManifestEntry e;
    e.id = tile_id(origin.y, origin.x);
    e.origin_x = origin.x;
    e.origin_y = origin.y;
    e.size = config.tile_size;
    e.black_fraction = fraction;
    e.ref_distance = texture_distance(texture, config.reference_texture);
    ranked.push_back(std::move(e));
  }
  if (ranked.empty()) throw DatasetError("no tile passed the black-fraction filter");

  local.top_m_clamped = static_cast<std::size_t>(config.top_m) > ranked.size();
  keep_top_m(ranked, config.top_m);

  DatasetManifest manifest;
  manifest.entries = std::move(ranked);
  manifest = split_manifest(std::move(manifest), val_fraction, seed);
  manifest.provenance.tile_size = config.tile_size;
  manifest.provenance.stride = config.stride;
  manifest.provenance.max_black_fraction = config.max_black_fraction;
  manifest.provenance.black_intensity_threshold = config.black_intensity_threshold;
  manifest.provenance.top_m = config.top_m;
  manifest.provenance.source_checksums = {{"heightmap", checksum(world.heightmap)},
                                          {"texture", checksum(world.texture)}};
  manifest.provenance.reference_checksum = checksum(config.reference_texture);

  std::filesystem::create_directories(out_dir / "tiles");
  for (ManifestEntry& e : manifest.entries) {
    e.heightmap_path = "tiles/" + e.id + "_height.png";
    e.texture_path = "tiles/" + e.id + "_texture.png";
    write_image_png(out_dir / e.heightmap_path,
                    world.heightmap.crop(e.origin_y, e.origin_x, e.size, e.size), 16);
    write_image_png(out_dir / e.texture_path, world.texture.crop(e.origin_y, e.origin_x, e.size, e.size), 8);
    (e.split == Split::train ? local.train : local.val) += 1;
  }
  local.selected = manifest.entries.size();
  write_manifest(manifest, out_dir / "manifest.jsonl");
  if (stats != nullptr) *stats = local;
  return manifest;
}

}  // namespace terragan
