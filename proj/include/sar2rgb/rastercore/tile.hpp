#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sar2rgb::rastercore {

// Numeric values are the on-disk codes of the tile format.
enum class BandRole : std::uint8_t { VV = 0, VH = 1, Red = 2, Green = 3, Blue = 4, QA60 = 5 };
enum class Sensor : std::uint8_t { S1 = 0, S2 = 1, QA60 = 2 };

std::string_view to_string(BandRole role);
std::string_view to_string(Sensor sensor);
BandRole parse_band_role(std::string_view name);
Sensor parse_sensor(std::string_view name);
std::optional<BandRole> band_role_from_code(std::uint8_t code);
std::optional<Sensor> sensor_from_code(std::uint8_t code);

inline const std::vector<BandRole>& sar_roles() {
  static const std::vector<BandRole> roles{BandRole::VV, BandRole::VH};
  return roles;
}
inline const std::vector<BandRole>& rgb_roles() {
  static const std::vector<BandRole> roles{BandRole::Red, BandRole::Green, BandRole::Blue};
  return roles;
}

struct TileMeta {
  std::string tile_id;
  std::string acquired_date;  // ISO-8601 "YYYY-MM-DD" or empty
  Sensor sensor = Sensor::S2;
  float nodata_sentinel = 0.0f;

  bool operator==(const TileMeta&) const = default;
};

/// Multi-band float32 raster, band-major then row-major. Immutable once
/// constructed; the constructor enforces every invariant so a Tile in hand is
/// always valid.
class Tile {
 public:
  Tile(std::vector<BandRole> band_roles, int height, int width, TileMeta meta,
       std::vector<float> data);

  int bands() const { return static_cast<int>(roles_.size()); }
  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t pixels() const { return static_cast<std::size_t>(height_) * width_; }

  const std::vector<BandRole>& band_roles() const { return roles_; }
  const TileMeta& meta() const { return meta_; }
  std::span<const float> data() const { return data_; }
  std::span<const float> band(int b) const { return std::span<const float>(data_).subspan(b * pixels(), pixels()); }
  float at(int b, int y, int x) const { return data_[(b * pixels()) + static_cast<std::size_t>(y) * width_ + x]; }

  bool has_roles(const std::vector<BandRole>& roles) const { return roles_ == roles; }

  // Same raster with different metadata (tile_id, date...). Revalidates.
  Tile with_meta(TileMeta meta) const;

  // Bit-exact comparison of data and metadata.
  bool operator==(const Tile& other) const;

 private:
  std::vector<BandRole> roles_;
  int height_;
  int width_;
  TileMeta meta_;
  std::vector<float> data_;
};

// Throws InvalidArgument unless `id` is a non-empty string free of path separators.
void validate_tile_id(std::string_view id);

}  // namespace sar2rgb::rastercore
