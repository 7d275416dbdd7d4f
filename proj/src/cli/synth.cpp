#include "sar2rgb/cli/synth.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "sar2rgb/detail/bytes.hpp"
#include "sar2rgb/error.hpp"
#include "sar2rgb/rastercore/external.hpp"
#include "sar2rgb/rastercore/tile_io.hpp"
#include "sar2rgb/rng.hpp"

namespace sar2rgb::cli {

namespace fs = std::filesystem;
using rastercore::BandRole;
using rastercore::Sensor;
using rastercore::Tile;
using rastercore::TileMeta;

void FixtureSpec::validate() const {
  if (n_pairs < 1) throw InvalidArgument("n_pairs must be at least 1");
  if (size < 16 || (size & (size - 1)) != 0) {
    throw InvalidArgument("size must be a power of two >= 16, got " + std::to_string(size));
  }
  auto unit = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument(std::string(name) + " must lie in [0, 1]");
  };
  unit(cloud_fraction, "cloud_fraction");
  unit(qa60_miss_fraction, "qa60_miss_fraction");
  unit(nodata_fraction, "nodata_fraction");
}

namespace {

constexpr std::uint64_t kCloudSalt = 0xC10D5A17C10D5A17ULL;
constexpr std::uint64_t kMissSalt = 0x0A60A60A60A60A60ULL;
constexpr std::uint64_t kNodataSalt = 0x00DA7A00DA7A00DAULL;

std::size_t fraction_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::lround(fraction * static_cast<double>(n)));
}

std::vector<bool> pick(std::size_t n, std::size_t k, std::uint64_t seed) {
  SplitMix64 rng(seed);
  const auto perm = fisher_yates(n, rng);
  std::vector<bool> chosen(n, false);
  for (std::size_t i = 0; i < k; ++i) chosen[perm[i]] = true;
  return chosen;
}

// Sum of three plane waves, scaled into [-1, 1].
struct Field {
  double amp[3], fy[3], fx[3], phase[3];

  explicit Field(SplitMix64& rng) {
    for (int k = 0; k < 3; ++k) {
      amp[k] = 0.5 + 0.5 * rng.uniform();
      fy[k] = 4.0 * rng.uniform() - 2.0;
      fx[k] = 4.0 * rng.uniform() - 2.0;
      phase[k] = 2.0 * std::numbers::pi * rng.uniform();
    }
  }

  double operator()(double y, double x) const {
    double s = 0.0, norm = 0.0;
    for (int k = 0; k < 3; ++k) {
      s += amp[k] * std::sin(2.0 * std::numbers::pi * (fy[k] * y + fx[k] * x) + phase[k]);
      norm += amp[k];
    }
    return s / norm;
  }
};

std::string iso_date(int days) {
  const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace

FixtureManifest synth_fixture(const FixtureSpec& spec, const fs::path& out_dir) {
  spec.validate();
  const auto n = static_cast<std::size_t>(spec.n_pairs);
  const int size = spec.size;
  const std::size_t px = static_cast<std::size_t>(size) * size;

  const auto cloudy = pick(n, fraction_count(spec.cloud_fraction, n), spec.seed ^ kCloudSalt);
  std::vector<std::size_t> cloudy_idx;
  for (std::size_t i = 0; i < n; ++i) {
    if (cloudy[i]) cloudy_idx.push_back(i);
  }
  const auto miss_local = pick(cloudy_idx.size(), fraction_count(spec.qa60_miss_fraction, cloudy_idx.size()),
                               spec.seed ^ kMissSalt);
  std::vector<bool> missed(n, false);
  for (std::size_t k = 0; k < cloudy_idx.size(); ++k) missed[cloudy_idx[k]] = miss_local[k];
  const auto nodata = pick(n, fraction_count(spec.nodata_fraction, n), spec.seed ^ kNodataSalt);

  for (const char* sub : {"s1", "s2", "qa60"}) fs::create_directories(out_dir / sub);
  if (spec.write_tiff) fs::create_directories(out_dir / "tiff");

  const int epoch_2021 = curation::parse_iso_date("2021-01-01");
  FixtureManifest manifest;
  for (std::size_t i = 0; i < n; ++i) {
    SplitMix64 rng(spec.seed ^ (0xA24BAED4963EE407ULL * (i + 1)));
    char id_buf[32];
    std::snprintf(id_buf, sizeof id_buf, "tile_%04zu", i);
    const std::string id = id_buf;
    const int s2_day = epoch_2021 + static_cast<int>(rng.below(360));
    const int s1_day = s2_day - static_cast<int>(rng.below(3));

    const Field f1(rng), f2(rng);
    std::vector<float> s1(2 * px), s2(3 * px), qa(px);
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        const std::size_t p = static_cast<std::size_t>(y) * size + x;
        const double u = f1(static_cast<double>(y) / size, static_cast<double>(x) / size);
        const double v = f2(static_cast<double>(y) / size, static_cast<double>(x) / size);
        const double vv = -12.0 + 7.0 * u;
        const double vh = -18.0 + 5.0 * (0.6 * u + 0.4 * v);
        s1[p] = static_cast<float>(vv);
        s1[px + p] = static_cast<float>(vh);
        const double a = (vv + 25.0) / 25.0;
        const double b = (vh + 25.0) / 25.0;
        const double r = 0.03 + 0.25 * a * a;
        const double g = 0.04 + 0.35 * a * (1.0 - b);
        const double bl = 0.05 + 0.2 * b + 0.05 * std::sin(6.0 * a);
        s2[p] = static_cast<float>(std::round(r * curation::kReflectanceScale));
        s2[px + p] = static_cast<float>(std::round(g * curation::kReflectanceScale));
        s2[2 * px + p] = static_cast<float>(std::round(bl * curation::kReflectanceScale));
        qa[p] = static_cast<float>(rng.below(1024));
      }
    }

    if (cloudy[i]) {
      const double cy = (0.5 + 0.5 * rng.uniform()) * size, cx = rng.uniform() * size;
      const double radius = size / 6.0 + rng.uniform() * size / 6.0;
      for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
          if ((y - cy) * (y - cy) + (x - cx) * (x - cx) > radius * radius) continue;
          const std::size_t p = static_cast<std::size_t>(y) * size + x;
          s2[p] = 9000.0f;
          s2[px + p] = 9000.0f;
          s2[2 * px + p] = 9200.0f;
          if (!missed[i]) qa[p] = static_cast<float>(static_cast<std::uint32_t>(qa[p]) | 1024u);
        }
      }
    }
    if (nodata[i]) {
      for (int c = 0; c < 3; ++c) std::fill_n(s2.begin() + c * px, px / 4, 0.0f);
    }

    const Tile s1_tile(rastercore::sar_roles(), size, size, TileMeta{id, iso_date(s1_day), Sensor::S1, -9999.0f},
                       std::move(s1));
    const Tile s2_tile(rastercore::rgb_roles(), size, size, TileMeta{id, iso_date(s2_day), Sensor::S2, 0.0f},
                       std::move(s2));
    const Tile qa_tile({BandRole::QA60}, size, size, TileMeta{id, iso_date(s2_day), Sensor::QA60, 0.0f},
                       std::move(qa));
    const auto file = id + ".s2tl";
    rastercore::write_tile(s1_tile, out_dir / "s1" / file);
    rastercore::write_tile(s2_tile, out_dir / "s2" / file);
    rastercore::write_tile(qa_tile, out_dir / "qa60" / file);
    if (spec.write_tiff) {
      rastercore::write_tiff(s1_tile, out_dir / "tiff" / (id + "_s1.tif"));
      rastercore::write_tiff(s2_tile, out_dir / "tiff" / (id + "_s2.tif"));
    }

    manifest.pairs.push_back({id, out_dir / "s1" / file, out_dir / "s2" / file, out_dir / "qa60" / file, std::nullopt});
    if (cloudy[i]) manifest.cloudy.push_back(id);
    if (cloudy[i] && !missed[i]) manifest.qa60_flagged.push_back(id);
    if (nodata[i]) manifest.nodata.push_back(id);
  }

  curation::write_manifest(manifest.pairs, out_dir / "manifest.jsonl");
  const nlohmann::json truth{{"cloudy", manifest.cloudy},
                             {"qa60_flagged", manifest.qa60_flagged},
                             {"nodata", manifest.nodata}};
  detail::write_text(out_dir / "truth.json", truth.dump(2) + "\n");
  return manifest;
}

}  // namespace sar2rgb::cli
