#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sar2rgb/cloudscreen/cloudscreen.hpp"
#include "sar2rgb/rastercore/tile.hpp"

namespace sar2rgb::curation {

using cloudscreen::ScreenReport;
using rastercore::Tile;
using rastercore::TileMeta;

struct TileRecord {
  TileMeta meta;
  std::filesystem::path path;
};

struct PairRecord {
  std::string pair_id;
  std::filesystem::path s1_path;
  std::filesystem::path s2_path;
  std::optional<std::filesystem::path> qa60_path;
  std::optional<ScreenReport> screen;

  bool operator==(const PairRecord&) const = default;
};

enum class MatchKey { TileId, TileIdAndDate };

struct PairPolicy {
  MatchKey match_key = MatchKey::TileId;
  int max_day_gap = 0;  // only consulted with TileIdAndDate

  void validate() const;
};

struct PairingResult {
  std::vector<PairRecord> pairs;
  std::size_t unmatched_s1 = 0;
  std::size_t unmatched_s2 = 0;
};

// Links S2 records to S1 records. TileId matches on tile_id alone;
// TileIdAndDate picks the nearest-dated S1 record of the same tile within
// max_day_gap, ties going to the earlier S1 date. QA60 records attach to the
// S2 record with the same (tile_id, date). Output follows S2 order.
PairingResult pair_manifests(std::span<const TileRecord> s1_records, std::span<const TileRecord> s2_records,
                             const PairPolicy& policy, std::span<const TileRecord> qa60_records = {});

struct FilterSpec {
  double max_nodata_ratio = 0.0;
  std::optional<double> max_qa60_cloud_ratio;
  std::optional<double> max_heuristic_cloud_ratio;

  void validate() const;

  // Dataset-1: no nodata, no QA60 cloud. Dataset-2 adds heuristic cloud = 0.
  static FilterSpec dataset1() { return {0.0, 0.0, std::nullopt}; }
  static FilterSpec dataset2() { return {0.0, 0.0, 0.0}; }
  static FilterSpec preset(std::string_view name);
};

std::vector<PairRecord> filter_dataset(std::span<const PairRecord> pairs, const FilterSpec& spec);

struct HoldoutSplit {
  std::vector<PairRecord> train;
  std::vector<PairRecord> eval;
};

// Fisher-Yates over indices with SplitMix64(seed); the first n shuffled
// indices form the eval set. Both halves keep the input order.
std::vector<std::size_t> holdout_indices(std::size_t count, std::size_t n, std::uint64_t seed);
HoldoutSplit split_holdout(std::span<const PairRecord> pairs, std::size_t n, std::uint64_t seed);

// Physical units <-> model space.
struct SarRange {
  float min_db = -25.0f;
  float max_db = 0.0f;
};

inline constexpr float kReflectanceScale = 10000.0f;

// Model-space array, channel-major then row-major.
struct ModelArray {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;
};

Tile normalize_s2_reflectance(const Tile& raw);
ModelArray normalize_s1(const Tile& db_tile, const SarRange& range = {});
ModelArray rgb_to_model(const Tile& reflectance);
Tile model_to_rgb(const ModelArray& model, TileMeta meta);

// ISO date "YYYY-MM-DD" to days since 1970-01-01.
int parse_iso_date(std::string_view date);

void to_json(nlohmann::json& j, const PairRecord& r);
void from_json(const nlohmann::json& j, PairRecord& r);

std::vector<PairRecord> read_manifest(const std::filesystem::path& path);
void write_manifest(std::span<const PairRecord> pairs, const std::filesystem::path& path);

}  // namespace sar2rgb::curation
