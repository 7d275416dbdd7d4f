#include <doctest.h>

#include "sar2rgb/cli/synth.hpp"
#include "sar2rgb/detail/bytes.hpp"
#include "sar2rgb/error.hpp"
#include "sar2rgb/rastercore/external.hpp"
#include "sar2rgb/rastercore/tile_io.hpp"
#include "support.hpp"

using namespace sar2rgb;
using namespace sar2rgb::rastercore;
using testsupport::Bytes;

namespace {

Bytes header(std::uint16_t bands, std::uint32_t h, std::uint32_t w, const std::string& id, const std::string& date) {
  Bytes b;
  b.str("S2TL").le<std::uint8_t>(1).le<std::uint8_t>(1).le(bands).le(h).le(w).le(0.0f);
  b.le<std::uint16_t>(static_cast<std::uint16_t>(id.size())).str(id);
  b.le<std::uint16_t>(static_cast<std::uint16_t>(date.size())).str(date);
  return b;
}

}  // namespace

TEST_CASE("1x1 single-band tile encodes to header plus four zero bytes") {
  const Tile t({BandRole::Red}, 1, 1, TileMeta{"a", "2021-03-04", Sensor::S2, 0.0f}, {0.0f});
  auto expected = header(1, 1, 1, "a", "2021-03-04");
  expected.le<std::uint8_t>(2).le<std::uint32_t>(0);
  CHECK(encode_tile(t) == expected.v);
  CHECK(expected.v.size() == 4 + 1 + 1 + 2 + 4 + 4 + 4 + 2 + 1 + 2 + 10 + 1 + 4);

  const auto dir = testsupport::scratch("tile_1x1");
  write_tile(t, dir / "a.s2tl");
  CHECK(detail::read_file(dir / "a.s2tl") == expected.v);
  CHECK(read_tile(dir / "a.s2tl") == t);
}

TEST_CASE("decode errors") {
  auto good = header(3, 1, 2, "x", "");
  good.le<std::uint8_t>(2).le<std::uint8_t>(3).le<std::uint8_t>(4);

  SUBCASE("bad magic") {
    auto b = good;
    for (int i = 0; i < 6; ++i) b.le(0.5f);
    std::copy_n("XXXX", 4, b.v.begin());
    CHECK_THROWS_WITH_AS(decode_tile(b.v), doctest::Contains("bad magic"), FormatError);
  }
  SUBCASE("three bands declared, two bands of payload") {
    auto b = good;
    for (int i = 0; i < 4; ++i) b.le(0.5f);
    CHECK_THROWS_WITH_AS(decode_tile(b.v), doctest::Contains("truncated"), FormatError);
  }
  SUBCASE("unsupported version") {
    auto b = good;
    for (int i = 0; i < 6; ++i) b.le(0.5f);
    b.v[4] = 2;
    CHECK_THROWS_WITH_AS(decode_tile(b.v), doctest::Contains("version"), FormatError);
  }
  SUBCASE("complete payload decodes") {
    auto b = good;
    for (int i = 0; i < 6; ++i) b.le(0.25f * static_cast<float>(i % 4));
    const auto t = decode_tile(b.v);
    CHECK(t.bands() == 3);
    CHECK(t.at(2, 0, 1) == 0.25f);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_tile(testsupport::scratch("missing") / "nope.s2tl"), IoError);
  }
}

TEST_CASE("tile invariants") {
  const TileMeta m{"id", "", Sensor::S2, 0.0f};
  CHECK_THROWS_AS(Tile(rgb_roles(), 2, 2, m, std::vector<float>(8)), InvalidArgument);
  CHECK_THROWS_AS(Tile({BandRole::Red, BandRole::Green}, 1, 1, m, std::vector<float>(3)), InvalidArgument);
  CHECK_THROWS_AS(Tile(rgb_roles(), 1, 1, m, {0.0f, NAN, 0.0f}), InvalidArgument);
  CHECK_THROWS_AS(Tile({BandRole::QA60}, 1, 1, TileMeta{"q", "", Sensor::QA60, 0.0f}, {0.5f}), InvalidArgument);
  CHECK_THROWS_AS(Tile(rgb_roles(), 1, 1, TileMeta{"a/b", "", Sensor::S2, 0.0f}, {0, 0, 0}), InvalidArgument);
}

TEST_CASE("writes are deterministic and round trip") {
  SplitMix64 rng(3);
  const auto t = testsupport::random_rgb(rng, 5, 7, "r");
  const auto dir = testsupport::scratch("tile_rt");
  write_tile(t, dir / "1.s2tl");
  write_tile(t, dir / "2.s2tl");
  CHECK(detail::read_file(dir / "1.s2tl") == detail::read_file(dir / "2.s2tl"));
  CHECK(read_tile(dir / "1.s2tl") == t);
}

TEST_CASE("png quantization") {
  const auto dir = testsupport::scratch("png");
  export_png(testsupport::constant_rgb(0.0f, 2, 3), dir / "black.png");
  export_png(testsupport::constant_rgb(1.0f, 2, 3), dir / "white.png");
  export_png(testsupport::constant_rgb(0.5f, 2, 3), dir / "half.png");
  const auto black = decode_png(dir / "black.png");
  CHECK(black.width == 3);
  CHECK(black.height == 2);
  for (auto v : black.pixels) CHECK(v == 0);
  for (auto v : decode_png(dir / "white.png").pixels) CHECK(v == 255);
  for (auto v : decode_png(dir / "half.png").pixels) CHECK(v == 128);

  CHECK_THROWS_AS(export_png(testsupport::constant_rgb(1.01f, 1, 1), dir / "x.png"), InvalidArgument);
  const Tile sar(sar_roles(), 1, 1, TileMeta{"s", "", Sensor::S1, 0.0f}, {0.1f, 0.2f});
  CHECK_THROWS_AS(export_png(sar, dir / "y.png"), InvalidArgument);
}

TEST_CASE("external raster ingestion") {
  const auto dir = testsupport::scratch("ingest");
  cli::FixtureSpec spec;
  spec.n_pairs = 2;
  spec.size = 16;
  spec.write_tiff = true;
  cli::synth_fixture(spec, dir);

  const auto s1 = ingest_external(dir / "tiff" / "tile_0001_s1.tif", {BandRole::VV, BandRole::VH});
  CHECK(s1.bands() == 2);
  CHECK(s1.meta().tile_id == "tile_0001_s1");
  CHECK(s1.meta().sensor == Sensor::S1);
  const auto stored = read_tile(dir / "s1" / "tile_0001.s2tl");
  CHECK(std::equal(s1.data().begin(), s1.data().end(), stored.data().begin(), stored.data().end()));

  write_tile(s1, dir / "again.s2tl");
  CHECK(read_tile(dir / "again.s2tl") == s1);

  const auto s2 = ingest_external(dir / "tiff" / "tile_0000_s2.tif", rgb_roles());
  CHECK(s2.bands() == 3);
  CHECK_THROWS_AS(ingest_external(dir / "tiff" / "tile_0000_s2.tif", sar_roles()), InvalidArgument);
  CHECK_THROWS_AS(ingest_external(dir / "tiff" / "absent.tif", sar_roles()), IoError);
}
