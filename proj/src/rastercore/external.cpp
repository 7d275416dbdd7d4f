#include "sar2rgb/rastercore/external.hpp"

#include <cstring>
#include <memory>

#include <tiffio.h>

#include "sar2rgb/error.hpp"

namespace sar2rgb::rastercore {
namespace {

struct TiffCloser {
  void operator()(TIFF* t) const {
    if (t) TIFFClose(t);
  }
};
using TiffPtr = std::unique_ptr<TIFF, TiffCloser>;

// Converts one stored sample to float32 without rescaling.
float sample_to_float(const std::uint8_t* p, std::uint16_t format, std::uint16_t bits) {
  auto load = [p]<typename T>(T) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    return static_cast<float>(v);
  };
  switch (format) {
    case SAMPLEFORMAT_UINT:
      switch (bits) {
        case 8: return load(std::uint8_t{});
        case 16: return load(std::uint16_t{});
        case 32: return load(std::uint32_t{});
      }
      break;
    case SAMPLEFORMAT_INT:
      switch (bits) {
        case 8: return load(std::int8_t{});
        case 16: return load(std::int16_t{});
        case 32: return load(std::int32_t{});
      }
      break;
    case SAMPLEFORMAT_IEEEFP:
      switch (bits) {
        case 32: return load(float{});
        case 64: return load(double{});
      }
      break;
  }
  throw FormatError("unsupported TIFF sample type (format " + std::to_string(format) + ", " +
                    std::to_string(bits) + " bits)");
}

Sensor sensor_for(const std::vector<BandRole>& roles) {
  if (roles == sar_roles()) return Sensor::S1;
  if (roles == rgb_roles()) return Sensor::S2;
  if (roles.size() == 1 && roles[0] == BandRole::QA60) return Sensor::QA60;
  bool sar = false, optical = false;
  for (auto r : roles) {
    sar = sar || r == BandRole::VV || r == BandRole::VH;
    optical = optical || r == BandRole::Red || r == BandRole::Green || r == BandRole::Blue;
  }
  if (sar && !optical) return Sensor::S1;
  if (optical && !sar) return Sensor::S2;
  throw InvalidArgument("band spec mixes sensors; pass explicit metadata");
}

}  // namespace

Tile ingest_external(const std::filesystem::path& path, const std::vector<BandRole>& band_spec,
                     std::optional<TileMeta> meta) {
  if (band_spec.empty()) throw InvalidArgument("band spec must name at least one band");
  if (!std::filesystem::exists(path)) throw IoError("raster '" + path.string() + "' does not exist");
  TIFFSetWarningHandler(nullptr);
  TiffPtr tif(TIFFOpen(path.string().c_str(), "r"));
  if (!tif) throw IoError("cannot read raster '" + path.string() + "'");

  std::uint32_t width = 0, height = 0;
  std::uint16_t spp = 1, bits = 8, format = SAMPLEFORMAT_UINT, planar = PLANARCONFIG_CONTIG;
  TIFFGetField(tif.get(), TIFFTAG_IMAGEWIDTH, &width);
  TIFFGetField(tif.get(), TIFFTAG_IMAGELENGTH, &height);
  TIFFGetFieldDefaulted(tif.get(), TIFFTAG_SAMPLESPERPIXEL, &spp);
  TIFFGetFieldDefaulted(tif.get(), TIFFTAG_BITSPERSAMPLE, &bits);
  TIFFGetFieldDefaulted(tif.get(), TIFFTAG_SAMPLEFORMAT, &format);
  TIFFGetFieldDefaulted(tif.get(), TIFFTAG_PLANARCONFIG, &planar);
  if (width == 0 || height == 0) throw FormatError("raster '" + path.string() + "' has no pixels");
  if (spp != band_spec.size()) {
    throw InvalidArgument("raster '" + path.string() + "' has " + std::to_string(spp) + " bands, band spec names " +
                          std::to_string(band_spec.size()));
  }
  if (bits % 8 != 0) throw FormatError("sub-byte TIFF samples are not supported");
  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t plane = std::size_t{width} * height;
  std::vector<float> data(plane * spp);

  // Scatters one decoded block (strip or tile) into the band-major payload.
  // Block covers rows [y0, y0+bh) and columns [x0, x0+bw); `sample` is the
  // plane for separate layouts, or -1 for interleaved blocks.
  auto scatter = [&](const std::vector<std::uint8_t>& block, std::uint32_t x0, std::uint32_t y0, std::uint32_t bw,
                     std::uint32_t bh, int sample) {
    const std::size_t per_pixel = sample < 0 ? spp : 1;
    for (std::uint32_t y = 0; y < bh && y0 + y < height; ++y) {
      for (std::uint32_t x = 0; x < bw && x0 + x < width; ++x) {
        const std::size_t dst = std::size_t{y0 + y} * width + (x0 + x);
        const std::uint8_t* src = block.data() + (std::size_t{y} * bw + x) * per_pixel * bytes_per_sample;
        if (sample >= 0) {
          data[sample * plane + dst] = sample_to_float(src, format, bits);
        } else {
          for (std::size_t s = 0; s < spp; ++s) {
            data[s * plane + dst] = sample_to_float(src + s * bytes_per_sample, format, bits);
          }
        }
      }
    }
  };

  const int planes = planar == PLANARCONFIG_SEPARATE ? spp : 1;
  if (TIFFIsTiled(tif.get())) {
    std::uint32_t tw = 0, th = 0;
    TIFFGetField(tif.get(), TIFFTAG_TILEWIDTH, &tw);
    TIFFGetField(tif.get(), TIFFTAG_TILELENGTH, &th);
    std::vector<std::uint8_t> block(static_cast<std::size_t>(TIFFTileSize(tif.get())));
    for (int s = 0; s < planes; ++s) {
      for (std::uint32_t y = 0; y < height; y += th) {
        for (std::uint32_t x = 0; x < width; x += tw) {
          if (TIFFReadTile(tif.get(), block.data(), x, y, 0, static_cast<std::uint16_t>(s)) < 0) {
            throw FormatError("failed to decode tile of '" + path.string() + "'");
          }
          scatter(block, x, y, tw, th, planes > 1 ? s : -1);
        }
      }
    }
  } else {
    std::vector<std::uint8_t> row(static_cast<std::size_t>(TIFFScanlineSize(tif.get())));
    for (int s = 0; s < planes; ++s) {
      for (std::uint32_t y = 0; y < height; ++y) {
        if (TIFFReadScanline(tif.get(), row.data(), y, static_cast<std::uint16_t>(s)) < 0) {
          throw FormatError("failed to decode row " + std::to_string(y) + " of '" + path.string() + "'");
        }
        scatter(row, 0, y, width, 1, planes > 1 ? s : -1);
      }
    }
  }

  TileMeta m;
  if (meta) {
    m = *meta;
  } else {
    m.tile_id = path.stem().string();
    m.sensor = sensor_for(band_spec);
  }
  return Tile(band_spec, static_cast<int>(height), static_cast<int>(width), std::move(m), std::move(data));
}

void write_tiff(const Tile& tile, const std::filesystem::path& path) {
  TiffPtr tif(TIFFOpen(path.string().c_str(), "w"));
  if (!tif) throw IoError("cannot open '" + path.string() + "' for writing");
  const auto w = static_cast<std::uint32_t>(tile.width());
  const auto h = static_cast<std::uint32_t>(tile.height());
  TIFFSetField(tif.get(), TIFFTAG_IMAGEWIDTH, w);
  TIFFSetField(tif.get(), TIFFTAG_IMAGELENGTH, h);
  TIFFSetField(tif.get(), TIFFTAG_SAMPLESPERPIXEL, static_cast<std::uint16_t>(tile.bands()));
  TIFFSetField(tif.get(), TIFFTAG_BITSPERSAMPLE, static_cast<std::uint16_t>(32));
  TIFFSetField(tif.get(), TIFFTAG_SAMPLEFORMAT, static_cast<std::uint16_t>(SAMPLEFORMAT_IEEEFP));
  TIFFSetField(tif.get(), TIFFTAG_PLANARCONFIG, static_cast<std::uint16_t>(PLANARCONFIG_SEPARATE));
  TIFFSetField(tif.get(), TIFFTAG_PHOTOMETRIC, static_cast<std::uint16_t>(PHOTOMETRIC_MINISBLACK));
  TIFFSetField(tif.get(), TIFFTAG_COMPRESSION, static_cast<std::uint16_t>(COMPRESSION_NONE));
  TIFFSetField(tif.get(), TIFFTAG_ROWSPERSTRIP, static_cast<std::uint32_t>(1));
  std::vector<float> row(w);
  for (int b = 0; b < tile.bands(); ++b) {
    const auto band = tile.band(b);
    for (std::uint32_t y = 0; y < h; ++y) {
      std::copy_n(band.begin() + std::size_t{y} * w, w, row.begin());
      if (TIFFWriteScanline(tif.get(), row.data(), y, static_cast<std::uint16_t>(b)) < 0) {
        throw IoError("TIFF write failed for '" + path.string() + "'");
      }
    }
  }
}

}  // namespace sar2rgb::rastercore
