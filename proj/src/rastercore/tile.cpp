#include "sar2rgb/rastercore/tile.hpp"

#include <array>
#include <cmath>
#include <cstring>

#include "sar2rgb/error.hpp"

namespace sar2rgb::rastercore {
namespace {

constexpr std::array<std::string_view, 6> kRoleNames{"VV", "VH", "RED", "GREEN", "BLUE", "QA60"};
constexpr std::array<std::string_view, 3> kSensorNames{"S1", "S2", "QA60"};

}  // namespace

std::string_view to_string(BandRole role) { return kRoleNames.at(static_cast<std::size_t>(role)); }
std::string_view to_string(Sensor sensor) { return kSensorNames.at(static_cast<std::size_t>(sensor)); }

BandRole parse_band_role(std::string_view name) {
  for (std::size_t i = 0; i < kRoleNames.size(); ++i) {
    if (kRoleNames[i] == name) return static_cast<BandRole>(i);
  }
  throw InvalidArgument("unknown band role '" + std::string(name) + "'");
}

Sensor parse_sensor(std::string_view name) {
  for (std::size_t i = 0; i < kSensorNames.size(); ++i) {
    if (kSensorNames[i] == name) return static_cast<Sensor>(i);
  }
  throw InvalidArgument("unknown sensor '" + std::string(name) + "'");
}

std::optional<BandRole> band_role_from_code(std::uint8_t code) {
  if (code < kRoleNames.size()) return static_cast<BandRole>(code);
  return std::nullopt;
}

std::optional<Sensor> sensor_from_code(std::uint8_t code) {
  if (code < kSensorNames.size()) return static_cast<Sensor>(code);
  return std::nullopt;
}

void validate_tile_id(std::string_view id) {
  if (id.empty()) throw InvalidArgument("tile_id must be non-empty");
  if (id.find_first_of("/\\") != std::string_view::npos) {
    throw InvalidArgument("tile_id '" + std::string(id) + "' contains a path separator");
  }
}

Tile::Tile(std::vector<BandRole> band_roles, int height, int width, TileMeta meta,
           std::vector<float> data)
    : roles_(std::move(band_roles)), height_(height), width_(width), meta_(std::move(meta)),
      data_(std::move(data)) {
  if (roles_.empty()) throw InvalidArgument("tile needs at least one band");
  if (roles_.size() > 0xFFFF) throw InvalidArgument("too many bands");
  if (height_ < 1 || width_ < 1) throw InvalidArgument("tile dimensions must be >= 1");
  validate_tile_id(meta_.tile_id);
  if (!std::isfinite(meta_.nodata_sentinel)) throw InvalidArgument("nodata sentinel must be finite");
  const std::size_t expected = roles_.size() * pixels();
  if (data_.size() != expected) {
    throw InvalidArgument("tile data holds " + std::to_string(data_.size()) + " values, expected " +
                          std::to_string(expected) + " for " + std::to_string(roles_.size()) +
                          " bands of " + std::to_string(height_) + "x" + std::to_string(width_));
  }
  for (float v : data_) {
    if (!std::isfinite(v)) throw InvalidArgument("tile '" + meta_.tile_id + "' holds a non-finite value");
  }
  bool has_qa = false;
  for (auto r : roles_) has_qa = has_qa || r == BandRole::QA60;
  if (has_qa) {
    if (roles_.size() != 1) throw InvalidArgument("QA60 tiles carry exactly one band");
    for (float v : data_) {
      if (v < 0.0f || v > 65535.0f || std::floor(v) != v) {
        throw InvalidArgument("QA60 values must be integers in [0, 65535]");
      }
    }
  }
}

Tile Tile::with_meta(TileMeta meta) const { return Tile(roles_, height_, width_, std::move(meta), data_); }

bool Tile::operator==(const Tile& other) const {
  if (roles_ != other.roles_ || height_ != other.height_ || width_ != other.width_) return false;
  if (meta_.tile_id != other.meta_.tile_id || meta_.acquired_date != other.meta_.acquired_date ||
      meta_.sensor != other.meta_.sensor ||
      std::memcmp(&meta_.nodata_sentinel, &other.meta_.nodata_sentinel, sizeof(float)) != 0) {
    return false;
  }
  return std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(float)) == 0;
}

}  // namespace sar2rgb::rastercore
