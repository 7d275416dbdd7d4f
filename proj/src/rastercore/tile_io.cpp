#include "sar2rgb/rastercore/tile_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <csetjmp>
#include <cstdio>
#include <memory>

#include <png.h>

#include "sar2rgb/detail/bytes.hpp"
#include "sar2rgb/error.hpp"

namespace sar2rgb::rastercore {

using detail::ByteReader;
using detail::ByteWriter;

std::vector<std::uint8_t> encode_tile(const Tile& tile) {
  const auto& meta = tile.meta();
  if (meta.tile_id.size() > 0xFFFF || meta.acquired_date.size() > 0xFFFF) {
    throw InvalidArgument("tile metadata string too long for the tile format");
  }
  ByteWriter w;
  w.buffer().reserve(40 + meta.tile_id.size() + meta.acquired_date.size() + tile.data().size() * 4);
  w.put_bytes(std::string_view(kTileMagic, 4));
  w.put<std::uint8_t>(kTileFormatVersion);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(meta.sensor));
  w.put<std::uint16_t>(static_cast<std::uint16_t>(tile.bands()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(tile.height()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(tile.width()));
  w.put<float>(meta.nodata_sentinel);
  w.put<std::uint16_t>(static_cast<std::uint16_t>(meta.tile_id.size()));
  w.put_bytes(meta.tile_id);
  w.put<std::uint16_t>(static_cast<std::uint16_t>(meta.acquired_date.size()));
  w.put_bytes(meta.acquired_date);
  for (auto role : tile.band_roles()) w.put<std::uint8_t>(static_cast<std::uint8_t>(role));
  for (float v : tile.data()) w.put<float>(v);
  return w.take();
}

Tile decode_tile(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kTileMagic, 4) != 0) {
    throw FormatError("bad magic: not an S2TL tile");
  }
  ByteReader r(bytes.data(), bytes.size(), "tile header");
  r.take(4);
  const auto version = r.get<std::uint8_t>();
  if (version != kTileFormatVersion) {
    throw FormatError("unsupported tile format version " + std::to_string(version));
  }
  TileMeta meta;
  const auto sensor = sensor_from_code(r.get<std::uint8_t>());
  if (!sensor) throw FormatError("invalid sensor code in tile header");
  meta.sensor = *sensor;
  const auto bands = r.get<std::uint16_t>();
  const auto height = r.get<std::uint32_t>();
  const auto width = r.get<std::uint32_t>();
  meta.nodata_sentinel = r.get<float>();
  meta.tile_id = r.get_string(r.get<std::uint16_t>());
  meta.acquired_date = r.get_string(r.get<std::uint16_t>());
  std::vector<BandRole> roles;
  roles.reserve(bands);
  for (unsigned b = 0; b < bands; ++b) {
    const auto role = band_role_from_code(r.get<std::uint8_t>());
    if (!role) throw FormatError("invalid band role code in tile header");
    roles.push_back(*role);
  }
  if (height == 0 || width == 0 || height > 0x7FFFFFFF || width > 0x7FFFFFFF) {
    throw FormatError("invalid tile dimensions in header");
  }
  const std::uint64_t count = std::uint64_t{bands} * height * width;
  const std::uint64_t payload = count * sizeof(float);
  if (payload > r.remaining()) {
    throw FormatError("truncated payload: header declares " + std::to_string(payload) + " bytes, file holds " +
                      std::to_string(r.remaining()));
  }
  if (payload < r.remaining()) throw FormatError("trailing bytes after tile payload");
  std::vector<float> data(count);
  for (auto& v : data) v = r.get<float>();
  try {
    return Tile(std::move(roles), static_cast<int>(height), static_cast<int>(width), std::move(meta),
                std::move(data));
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("tile file violates tile invariants: ") + e.what());
  }
}

Tile read_tile(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("tile file '" + path.string() + "' does not exist");
  try {
    return decode_tile(detail::read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_tile(const Tile& tile, const std::filesystem::path& path) {
  detail::write_file(path, encode_tile(tile));
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

void export_png(const Tile& tile, const std::filesystem::path& path) {
  if (!tile.has_roles(rgb_roles())) throw InvalidArgument("export_png needs band roles [RED, GREEN, BLUE]");
  constexpr float kSlack = 1e-6f;
  for (float v : tile.data()) {
    if (v < -kSlack || v > 1.0f + kSlack) {
      throw InvalidArgument("export_png: value " + std::to_string(v) + " outside [0, 1]");
    }
  }
  const int h = tile.height();
  const int w = tile.width();
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(h) * w * 3);
  for (int b = 0; b < 3; ++b) {
    const auto band = tile.band(b);
    for (std::size_t i = 0; i < band.size(); ++i) {
      const double q = std::floor(static_cast<double>(band[i]) * 255.0 + 0.5);
      rgb[i * 3 + b] = static_cast<std::uint8_t>(std::clamp(q, 0.0, 255.0));
    }
  }

  FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) throw IoError("cannot open '" + path.string() + "' for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG encoding failed for '" + path.string() + "'");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < h; ++y) png_write_row(png, rgb.data() + static_cast<std::size_t>(y) * w * 3);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

RgbImage decode_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    throw FormatError("cannot decode PNG '" + path.string() + "': " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  RgbImage out;
  out.width = static_cast<int>(image.width);
  out.height = static_cast<int>(image.height);
  out.pixels.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
    png_image_free(&image);
    throw FormatError("cannot decode PNG '" + path.string() + "': " + image.message);
  }
  return out;
}

}  // namespace sar2rgb::rastercore
