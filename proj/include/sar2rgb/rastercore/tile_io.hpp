#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sar2rgb/rastercore/tile.hpp"

namespace sar2rgb::rastercore {

inline constexpr char kTileMagic[4] = {'S', '2', 'T', 'L'};
inline constexpr std::uint8_t kTileFormatVersion = 1;

// Little-endian layout:
//   magic "S2TL" | version u8 | sensor u8 | band_count u16 | height u32 |
//   width u32 | nodata f32 | id_len u16 | id | date_len u16 | date |
//   band roles u8 x band_count | payload f32, band-major, row-major
std::vector<std::uint8_t> encode_tile(const Tile& tile);
Tile decode_tile(const std::vector<std::uint8_t>& bytes);

Tile read_tile(const std::filesystem::path& path);
void write_tile(const Tile& tile, const std::filesystem::path& path);

// 8-bit RGB PNG, each channel quantized as floor(v * 255 + 0.5).
// Requires roles [RED, GREEN, BLUE] and values within [0, 1] (1e-6 slack).
void export_png(const Tile& tile, const std::filesystem::path& path);

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // interleaved RGB
};
RgbImage decode_png(const std::filesystem::path& path);

}  // namespace sar2rgb::rastercore
