#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "sar2rgb/rastercore/tile.hpp"

namespace sar2rgb::rastercore {

// Reads a TIFF/GeoTIFF raster (stripped or tiled, chunky or planar, any
// integer or float sample type) and copies the stored values unmodified into a
// float32 Tile. The band count of the source must equal band_spec.size().
// Metadata defaults: tile_id from the file stem, sensor from the band roles.
Tile ingest_external(const std::filesystem::path& path, const std::vector<BandRole>& band_spec,
                     std::optional<TileMeta> meta = std::nullopt);

// Writes an uncompressed planar float32 TIFF. Used by the fixture generator
// to produce ingestible rasters.
void write_tiff(const Tile& tile, const std::filesystem::path& path);

}  // namespace sar2rgb::rastercore
