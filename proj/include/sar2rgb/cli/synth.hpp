#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sar2rgb/curation/curation.hpp"

namespace sar2rgb::cli {

struct FixtureSpec {
  int n_pairs = 50;
  int size = 64;
  double cloud_fraction = 0.0;
  std::uint64_t seed = 0;
  // Extras for exercising the filters: cloudy tiles whose QA60 bits stay
  // clear, and tiles with a nodata stripe.
  double qa60_miss_fraction = 0.0;
  double nodata_fraction = 0.0;
  bool write_tiff = false;

  void validate() const;
};

struct FixtureManifest {
  std::vector<curation::PairRecord> pairs;  // in tile order
  std::vector<std::string> cloudy;          // pair ids with an injected blob
  std::vector<std::string> qa60_flagged;    // pair ids with QA60 bit 10 set
  std::vector<std::string> nodata;          // pair ids with a nodata stripe
};

// Layout under out_dir: s1/, s2/, qa60/ (one .s2tl per tile), manifest.jsonl,
// truth.json and, with write_tiff, tiff/<id>_s1.tif and tiff/<id>_s2.tif.
// S1 holds VV/VH in dB, S2 holds RGB digital numbers (reflectance x 10000).
FixtureManifest synth_fixture(const FixtureSpec& spec, const std::filesystem::path& out_dir);

}  // namespace sar2rgb::cli
