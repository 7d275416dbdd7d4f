#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sar2rgb/rastercore/tile.hpp"
#include "sar2rgb/rng.hpp"

namespace testsupport {

namespace fs = std::filesystem;
using sar2rgb::SplitMix64;
using sar2rgb::rastercore::Tile;
using sar2rgb::rastercore::TileMeta;

// Fresh empty directory per call site.
inline fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "sar2rgb_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

inline double oracle_mae(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
  return s / static_cast<double>(a.size());
}

inline double oracle_psnr(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    s += d * d;
  }
  const double mse = s / static_cast<double>(a.size());
  if (mse < 1e-12) return 99.0;
  return 10.0 * std::log10(1.0 / mse);
}

// Reflected CRC-32 (poly 0xEDB88320), one bit at a time.
inline std::uint32_t oracle_crc32(std::span<const std::uint8_t> bytes) {
  std::uint32_t crc = 0xFFFFFFFFu;
  for (auto b : bytes) {
    crc ^= b;
    for (int k = 0; k < 8; ++k) crc = (crc >> 1) ^ (0xEDB88320u & (0u - (crc & 1u)));
  }
  return ~crc;
}

inline Tile random_rgb(SplitMix64& rng, int h, int w, const std::string& id = "t") {
  std::vector<float> v(static_cast<std::size_t>(3) * h * w);
  for (auto& x : v) x = static_cast<float>(rng.uniform());
  return Tile(sar2rgb::rastercore::rgb_roles(), h, w, TileMeta{id, "2021-01-01", sar2rgb::rastercore::Sensor::S2, 0.0f},
              std::move(v));
}

inline Tile constant_rgb(float value, int h, int w, const std::string& id = "t") {
  return Tile(sar2rgb::rastercore::rgb_roles(), h, w, TileMeta{id, "", sar2rgb::rastercore::Sensor::S2, -1.0f},
              std::vector<float>(static_cast<std::size_t>(3) * h * w, value));
}

struct Bytes {
  std::vector<std::uint8_t> v;
  template <typename T>
  Bytes& le(T x) {
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, &x, sizeof(T));
    v.insert(v.end(), raw, raw + sizeof(T));
    return *this;
  }
  Bytes& str(const std::string& s) {
    v.insert(v.end(), s.begin(), s.end());
    return *this;
  }
};

}  // namespace testsupport
