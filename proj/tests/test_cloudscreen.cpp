#include <doctest.h>

#include "sar2rgb/cli/synth.hpp"
#include "sar2rgb/cloudscreen/cloudscreen.hpp"
#include "sar2rgb/curation/curation.hpp"
#include "sar2rgb/error.hpp"
#include "sar2rgb/rastercore/tile_io.hpp"
#include "support.hpp"

using namespace sar2rgb;
using namespace sar2rgb::cloudscreen;
using rastercore::BandRole;
using rastercore::Sensor;
using rastercore::TileMeta;

namespace {

Tile qa_tile(std::vector<float> values, int h, int w) {
  return Tile({BandRole::QA60}, h, w, TileMeta{"q", "", Sensor::QA60, 0.0f}, std::move(values));
}

Tile rgb_pixels(const std::vector<std::array<float, 3>>& px, int h, int w, float sentinel = -1.0f) {
  std::vector<float> v(3 * px.size());
  for (std::size_t i = 0; i < px.size(); ++i) {
    for (int c = 0; c < 3; ++c) v[c * px.size() + i] = px[i][c];
  }
  return Tile(rastercore::rgb_roles(), h, w, TileMeta{"p", "", Sensor::S2, sentinel}, std::move(v));
}

}  // namespace

TEST_CASE("qa60 bits 10 and 11") {
  const auto m = decode_qa60(qa_tile({0, 1024, 2048, 3072, 512, 1023, 65535, 4096}, 1, 8));
  CHECK(m.flags == std::vector<std::uint8_t>{0, 1, 1, 1, 0, 0, 1, 0});
  CHECK(m.source == MaskSource::QA60);
  CHECK_THROWS_AS(decode_qa60(testsupport::constant_rgb(0.0f, 1, 1)), InvalidArgument);
}

TEST_CASE("nodata ratio") {
  CHECK(nodata_ratio(rgb_pixels({{0, 0, 0}, {0, 0, 0}}, 1, 2, 0.0f)) == 1.0);
  CHECK(nodata_ratio(rgb_pixels({{0.1f, 0.2f, 0.3f}, {0.2f, 0.2f, 0.2f}}, 1, 2, 0.0f)) == 0.0);
  CHECK(nodata_ratio(rgb_pixels({{0, 0, 0}, {0, 0.1f, 0}, {0.3f, 0.3f, 0.3f}, {0.1f, 0.1f, 0.1f}}, 2, 2, 0.0f)) ==
        0.25);
}

TEST_CASE("heuristic mask per pixel") {
  const auto m = heuristic_cloud_mask(rgb_pixels({{1, 1, 1}, {1, 0, 0}, {0.05f, 0.05f, 0.05f}}, 1, 3));
  CHECK(m.flags == std::vector<std::uint8_t>{1, 0, 0});
  CHECK_THROWS_AS(heuristic_cloud_mask(rgb_pixels({{1.1f, 0, 0}}, 1, 1)), InvalidArgument);
  HeuristicParams bad;
  bad.epsilon = 0.0f;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("mask ratio") {
  CloudMask m{10, 10, std::vector<std::uint8_t>(100, 0), MaskSource::Heuristic};
  CHECK(mask_ratio(m) == 0.0);
  for (int i = 0; i < 37; ++i) m.flags[i * 2] = 1;
  CHECK(mask_ratio(m) == doctest::Approx(0.37).epsilon(1e-15));
  std::fill(m.flags.begin(), m.flags.end(), 1);
  CHECK(mask_ratio(m) == 1.0);
}

TEST_CASE("white 4x4 blob on a dark 16x16 field") {
  std::vector<std::array<float, 3>> px(256, {0.05f, 0.04f, 0.06f});
  for (int y = 5; y < 9; ++y) {
    for (int x = 2; x < 6; ++x) px[y * 16 + x] = {1.0f, 1.0f, 1.0f};
  }
  const auto t = rgb_pixels(px, 16, 16, 0.0f);

  // scalar-loop oracle
  int cloudy = 0;
  for (const auto& p : px) {
    const float v = std::max({p[0], p[1], p[2]});
    const float s = (v - std::min({p[0], p[1], p[2]})) / std::max(v, 1e-6f);
    if (v - s > 0.65f && v > 0.35f) ++cloudy;
  }
  CHECK(cloudy == 16);
  const auto r = screen_tile(t, nullptr);
  CHECK(r.heuristic_cloud_ratio == 0.0625);
  CHECK(r.nodata_ratio == 0.0);
  CHECK_FALSE(r.qa60_cloud_ratio.has_value());
}

TEST_CASE("screen_tile aggregation") {
  SUBCASE("all sentinel") {
    const auto r = screen_tile(rgb_pixels({{0, 0, 0}, {0, 0, 0}}, 1, 2, 0.0f), nullptr);
    CHECK(r.nodata_ratio == 1.0);
    CHECK(r.heuristic_cloud_ratio == 0.0);
  }
  SUBCASE("nodata pixels leave the heuristic denominator") {
    const auto r = screen_tile(rgb_pixels({{0, 0, 0}, {1, 1, 1}, {0.1f, 0.2f, 0.1f}, {0.1f, 0.1f, 0.1f}}, 2, 2, 0.0f),
                               nullptr);
    CHECK(r.nodata_ratio == 0.25);
    CHECK(r.heuristic_cloud_ratio == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }
  SUBCASE("qa60 ratio and size mismatch") {
    const auto rgb = rgb_pixels({{0.1f, 0.1f, 0.2f}, {0.1f, 0.1f, 0.2f}}, 1, 2);
    const auto qa = qa_tile({1024, 512}, 1, 2);
    CHECK(screen_tile(rgb, &qa).qa60_cloud_ratio == 0.5);
    const auto wrong = qa_tile({0, 0, 0}, 1, 3);
    CHECK_THROWS_AS(screen_tile(rgb, &wrong), InvalidArgument);
  }
}

TEST_CASE("clean fixture tile screens to zero") {
  const auto dir = testsupport::scratch("clean_screen");
  cli::FixtureSpec spec;
  spec.n_pairs = 3;
  spec.size = 32;
  const auto m = cli::synth_fixture(spec, dir);
  for (const auto& p : m.pairs) {
    const auto rgb = curation::normalize_s2_reflectance(rastercore::read_tile(p.s2_path));
    const auto qa = rastercore::read_tile(*p.qa60_path);
    // scalar loop over every pixel
    std::size_t nodata = 0, qa_cloud = 0, heur = 0;
    for (int y = 0; y < rgb.height(); ++y) {
      for (int x = 0; x < rgb.width(); ++x) {
        const float r = rgb.at(0, y, x), g = rgb.at(1, y, x), b = rgb.at(2, y, x);
        if (r == 0.0f && g == 0.0f && b == 0.0f) ++nodata;
        if ((static_cast<std::uint32_t>(qa.at(0, y, x)) & 0xC00u) != 0) ++qa_cloud;
        const float v = std::max({r, g, b});
        if (v - (v - std::min({r, g, b})) / std::max(v, 1e-6f) > 0.65f && v > 0.35f) ++heur;
      }
    }
    CHECK(nodata == 0);
    CHECK(qa_cloud == 0);
    CHECK(heur == 0);
    const auto rep = screen_tile(rgb, &qa);
    CHECK(rep.nodata_ratio == 0.0);
    CHECK(rep.qa60_cloud_ratio == 0.0);
    CHECK(rep.heuristic_cloud_ratio == 0.0);
  }
}

TEST_CASE("screen report json") {
  ScreenReport r{"t1", 0.5, std::nullopt, 0.25};
  const nlohmann::json j = r;
  CHECK(j.at("qa60_cloud_ratio").is_null());
  CHECK(j.get<ScreenReport>() == r);
  HeuristicParams p;
  nlohmann::json pj = p;
  pj["extra"] = 1;
  CHECK_THROWS(pj.get<HeuristicParams>());
}
