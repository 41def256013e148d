#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "terragan/image.hpp"

namespace terragan {

/// Co-registered world rasters: elevation (1 channel) and texture (RGB), both in [0,1].
struct WorldImagePair {
  Image heightmap;
  Image texture;
  double meters_per_pixel = 1000.0;

  /// Loads both rasters from PNG/JPEG; the heightmap is averaged to one channel.
  static WorldImagePair load(const std::filesystem::path& heightmap_path,
                             const std::filesystem::path& texture_path);

  /// Throws InvalidInput unless the rasters agree in size and channel layout.
  void validate() const;
};

struct TilePair {
  std::string id;
  int origin_x = 0;
  int origin_y = 0;
  int size = 512;
  Image heightmap;  // size x size x 1
  Image texture;    // size x size x 3
  double black_fraction = 0.0;
  std::optional<double> ref_distance;
};

struct TileOrigin {
  int y = 0;
  int x = 0;
  friend bool operator==(const TileOrigin&, const TileOrigin&) = default;
  friend auto operator<=>(const TileOrigin&, const TileOrigin&) = default;
};

struct FilterConfig {
  int tile_size = 512;
  int stride = 512;
  double max_black_fraction = 0.9;
  double black_intensity_threshold = 0.05;
  int top_m = 1000;
  Image reference_texture;

  void validate() const;
};

enum class Split { train, val };
std::string to_string(Split split);
Split split_from_string(const std::string& text);

struct ManifestEntry {
  std::string id;
  int origin_x = 0;
  int origin_y = 0;
  int size = 0;
  double black_fraction = 0.0;
  std::optional<double> ref_distance;
  Split split = Split::train;
  std::string heightmap_path;  // relative to the manifest's directory
  std::string texture_path;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// Header record of a manifest: the filter settings that produced it and
/// checksums of the source rasters.
struct ManifestProvenance {
  int tile_size = 0;
  int stride = 0;
  double max_black_fraction = 0.0;
  double black_intensity_threshold = 0.0;
  int top_m = 0;
  double val_fraction = 0.0;
  std::uint64_t split_seed = 0;
  std::map<std::string, std::string> source_checksums;
  std::string reference_checksum;

  friend bool operator==(const ManifestProvenance&, const ManifestProvenance&) = default;
};

struct DatasetManifest {
  ManifestProvenance provenance;
  std::vector<ManifestEntry> entries;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

/// Thrown when a dataset cannot be used (no tiles survive, missing crops).
class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Canonical tile id; zero-padded so lexical order equals row-major order.
std::string tile_id(int origin_y, int origin_x);

/// Every origin (r*stride, c*stride) whose window fits, row-major.
std::vector<TileOrigin> tile_origins(int height, int width, int tile_size, int stride);

/// Crops a tile at the given origin with black_fraction populated.
TilePair make_tile(const WorldImagePair& world, TileOrigin origin, int tile_size, double black_threshold);

/// Sliding-window extraction. Tiles are produced lazily in row-major order and
/// handed to `sink`; this keeps memory flat for full-size world rasters.
void extract_tiles(const WorldImagePair& world, int tile_size, int stride, double black_threshold,
                   const std::function<void(TilePair&&)>& sink);

/// Convenience overload collecting the stream into a vector.
std::vector<TilePair> extract_tiles(const WorldImagePair& world, int tile_size, int stride,
                                    double black_threshold = 0.05);

/// Fraction of pixels with intensity strictly below `black_threshold`.
double black_fraction(const Image& heightmap, double black_threshold);

/// Keeps tiles with black_fraction < max_black_fraction, order preserved.
std::vector<TilePair> filter_black(std::vector<TilePair> tiles, double max_black_fraction);

/// Euclidean distance over all pixel-channel positions.
double texture_distance(const Image& a, const Image& b);

/// Ranks tiles by distance to `reference` and keeps the m closest, ordered by
/// (ref_distance, id). Crop paths are left empty; splits default to train.
DatasetManifest select_top_m(std::vector<TilePair>& tiles, const Image& reference, int m);

/// Seeded assignment of round(val_fraction * N) entries to the val split.
DatasetManifest split_manifest(DatasetManifest manifest, double val_fraction, std::uint64_t seed);

/// JSON Lines: a header line followed by one line per entry.
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest read_manifest(const std::filesystem::path& path);

struct PrepareStats {
  std::size_t candidates = 0;
  std::size_t after_black_filter = 0;
  std::size_t selected = 0;
  std::size_t train = 0;
  std::size_t val = 0;
  bool top_m_clamped = false;
};

/// Full procedure: extract, filter, rank, keep top M, split, then persist
/// crops under `out_dir/tiles/` and the manifest as `out_dir/manifest.jsonl`.
/// Crops: heightmap as 16-bit gray PNG, texture as 8-bit RGB PNG.
DatasetManifest prepare_dataset(const WorldImagePair& world, const FilterConfig& config, double val_fraction,
                                std::uint64_t seed, const std::filesystem::path& out_dir,
                                PrepareStats* stats = nullptr);

}  // namespace terragan
