#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sar2rgb/rastercore/tile.hpp"

namespace sar2rgb::cloudscreen {

using rastercore::Tile;

// QA60 bit 10 flags opaque cloud, bit 11 flags cirrus.
inline constexpr std::uint32_t kQa60OpaqueBit = 1u << 10;
inline constexpr std::uint32_t kQa60CirrusBit = 1u << 11;
inline constexpr std::uint32_t kQa60CloudBits = kQa60OpaqueBit | kQa60CirrusBit;

enum class MaskSource { QA60, Heuristic };

struct CloudMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> flags;  // row-major, 1 = cloudy
  MaskSource source = MaskSource::Heuristic;

  bool at(int y, int x) const { return flags[static_cast<std::size_t>(y) * width + x] != 0; }
  bool operator==(const CloudMask&) const = default;
};

// Thresholds for the brightness-minus-saturation cloud cue. These are
// configuration; the defaults flag bright, grey pixels only.
struct HeuristicParams {
  float score_threshold = 0.65f;
  float brightness_threshold = 0.35f;
  float epsilon = 1e-6f;

  void validate() const;
};

struct ScreenReport {
  std::string tile_id;
  double nodata_ratio = 0.0;
  std::optional<double> qa60_cloud_ratio;
  double heuristic_cloud_ratio = 0.0;

  bool operator==(const ScreenReport&) const = default;
};

CloudMask decode_qa60(const Tile& qa60);

// Fraction of pixels whose three RGB bands all equal the nodata sentinel.
double nodata_ratio(const Tile& rgb);

// Per pixel, with V = max(r,g,b) and S = (V - min(r,g,b)) / max(V, eps):
// cloudy iff V - S > score_threshold and V > brightness_threshold.
// Expects reflectance in [0, 1].
CloudMask heuristic_cloud_mask(const Tile& rgb, const HeuristicParams& params = {});

double mask_ratio(const CloudMask& mask);

// Aggregates the three ratios. The heuristic ratio is taken over valid
// (non-nodata) pixels only, and is 0 for an entirely nodata tile.
ScreenReport screen_tile(const Tile& rgb, const Tile* qa60, const HeuristicParams& params = {});

void to_json(nlohmann::json& j, const ScreenReport& r);
void from_json(const nlohmann::json& j, ScreenReport& r);
void to_json(nlohmann::json& j, const HeuristicParams& p);
void from_json(const nlohmann::json& j, HeuristicParams& p);

}  // namespace sar2rgb::cloudscreen
