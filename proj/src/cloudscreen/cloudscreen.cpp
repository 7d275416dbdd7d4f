#include "sar2rgb/cloudscreen/cloudscreen.hpp"

#include <algorithm>

#include "sar2rgb/error.hpp"

namespace sar2rgb::cloudscreen {

using rastercore::BandRole;

void HeuristicParams::validate() const {
  if (!(score_threshold > 0.0f && score_threshold <= 1.0f)) {
    throw InvalidArgument("score_threshold must lie in (0, 1]");
  }
  if (!(brightness_threshold >= 0.0f && brightness_threshold <= 1.0f)) {
    throw InvalidArgument("brightness_threshold must lie in [0, 1]");
  }
  if (!(epsilon > 0.0f)) throw InvalidArgument("epsilon must be positive");
}

CloudMask decode_qa60(const Tile& qa60) {
  if (qa60.bands() != 1 || qa60.band_roles()[0] != BandRole::QA60) {
    throw InvalidArgument("decode_qa60 expects a single QA60 band");
  }
  CloudMask mask{qa60.height(), qa60.width(), std::vector<std::uint8_t>(qa60.pixels()), MaskSource::QA60};
  const auto values = qa60.band(0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const float v = values[i];
    if (v < 0.0f || v > 65535.0f || v != static_cast<float>(static_cast<std::uint32_t>(v))) {
      throw InvalidArgument("QA60 value " + std::to_string(v) + " is not a 16-bit integer");
    }
    mask.flags[i] = (static_cast<std::uint32_t>(v) & kQa60CloudBits) != 0 ? 1 : 0;
  }
  return mask;
}

namespace {

void require_rgb(const Tile& rgb, const char* op) {
  if (!rgb.has_roles(rastercore::rgb_roles())) {
    throw InvalidArgument(std::string(op) + " expects band roles [RED, GREEN, BLUE]");
  }
}

std::vector<std::uint8_t> nodata_flags(const Tile& rgb) {
  const float s = rgb.meta().nodata_sentinel;
  const auto r = rgb.band(0), g = rgb.band(1), b = rgb.band(2);
  std::vector<std::uint8_t> flags(rgb.pixels());
  for (std::size_t i = 0; i < flags.size(); ++i) flags[i] = (r[i] == s && g[i] == s && b[i] == s) ? 1 : 0;
  return flags;
}

}  // namespace

double nodata_ratio(const Tile& rgb) {
  require_rgb(rgb, "nodata_ratio");
  const auto flags = nodata_flags(rgb);
  const auto n = std::count(flags.begin(), flags.end(), std::uint8_t{1});
  return static_cast<double>(n) / static_cast<double>(flags.size());
}

CloudMask heuristic_cloud_mask(const Tile& rgb, const HeuristicParams& params) {
  require_rgb(rgb, "heuristic_cloud_mask");
  params.validate();
  constexpr float kSlack = 1e-6f;
  const auto r = rgb.band(0), g = rgb.band(1), b = rgb.band(2);
  CloudMask mask{rgb.height(), rgb.width(), std::vector<std::uint8_t>(rgb.pixels()), MaskSource::Heuristic};
  for (std::size_t i = 0; i < mask.flags.size(); ++i) {
    const float hi = std::max({r[i], g[i], b[i]});
    const float lo = std::min({r[i], g[i], b[i]});
    if (lo < -kSlack || hi > 1.0f + kSlack) {
      throw InvalidArgument("heuristic_cloud_mask expects reflectance in [0, 1], got " + std::to_string(lo < -kSlack ? lo : hi));
    }
    const float saturation = (hi - lo) / std::max(hi, params.epsilon);
    const float score = hi - saturation;
    mask.flags[i] = (score > params.score_threshold && hi > params.brightness_threshold) ? 1 : 0;
  }
  return mask;
}

double mask_ratio(const CloudMask& mask) {
  if (mask.flags.empty()) return 0.0;
  const auto n = std::count(mask.flags.begin(), mask.flags.end(), std::uint8_t{1});
  return static_cast<double>(n) / static_cast<double>(mask.flags.size());
}

ScreenReport screen_tile(const Tile& rgb, const Tile* qa60, const HeuristicParams& params) {
  require_rgb(rgb, "screen_tile");
  ScreenReport report;
  report.tile_id = rgb.meta().tile_id;

  const auto nodata = nodata_flags(rgb);
  const auto n_nodata = static_cast<std::size_t>(std::count(nodata.begin(), nodata.end(), std::uint8_t{1}));
  report.nodata_ratio = static_cast<double>(n_nodata) / static_cast<double>(nodata.size());

  if (qa60 != nullptr) {
    if (qa60->height() != rgb.height() || qa60->width() != rgb.width()) {
      throw InvalidArgument("QA60 tile " + std::to_string(qa60->height()) + "x" + std::to_string(qa60->width()) +
                            " does not match RGB tile " + std::to_string(rgb.height()) + "x" +
                            std::to_string(rgb.width()));
    }
    report.qa60_cloud_ratio = mask_ratio(decode_qa60(*qa60));
  }

  const std::size_t valid = nodata.size() - n_nodata;
  if (valid == 0) {
    report.heuristic_cloud_ratio = 0.0;
  } else {
    const auto mask = heuristic_cloud_mask(rgb, params);
    std::size_t cloudy = 0;
    for (std::size_t i = 0; i < nodata.size(); ++i) cloudy += (mask.flags[i] && !nodata[i]) ? 1 : 0;
    report.heuristic_cloud_ratio = static_cast<double>(cloudy) / static_cast<double>(valid);
  }
  return report;
}

void to_json(nlohmann::json& j, const ScreenReport& r) {
  j = nlohmann::json{{"tile_id", r.tile_id},
                     {"nodata_ratio", r.nodata_ratio},
                     {"qa60_cloud_ratio", r.qa60_cloud_ratio ? nlohmann::json(*r.qa60_cloud_ratio) : nlohmann::json()},
                     {"heuristic_cloud_ratio", r.heuristic_cloud_ratio}};
}

void from_json(const nlohmann::json& j, ScreenReport& r) {
  r.tile_id = j.at("tile_id").get<std::string>();
  r.nodata_ratio = j.at("nodata_ratio").get<double>();
  const auto& q = j.at("qa60_cloud_ratio");
  r.qa60_cloud_ratio = q.is_null() ? std::nullopt : std::optional<double>(q.get<double>());
  r.heuristic_cloud_ratio = j.at("heuristic_cloud_ratio").get<double>();
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(r.nodata_ratio) || !in_unit(r.heuristic_cloud_ratio) ||
      (r.qa60_cloud_ratio && !in_unit(*r.qa60_cloud_ratio))) {
    throw InvalidArgument("screen report '" + r.tile_id + "' has a ratio outside [0, 1]");
  }
}

void to_json(nlohmann::json& j, const HeuristicParams& p) {
  j = nlohmann::json{{"score_threshold", p.score_threshold},
                     {"brightness_threshold", p.brightness_threshold},
                     {"epsilon", p.epsilon}};
}

void from_json(const nlohmann::json& j, HeuristicParams& p) {
  HeuristicParams d;
  for (const auto& [key, value] : j.items()) {
    if (key == "score_threshold") d.score_threshold = value.get<float>();
    else if (key == "brightness_threshold") d.brightness_threshold = value.get<float>();
    else if (key == "epsilon") d.epsilon = value.get<float>();
    else throw InvalidArgument("unknown heuristic parameter '" + key + "'");
  }
  d.validate();
  p = d;
}

}  // namespace sar2rgb::cloudscreen
