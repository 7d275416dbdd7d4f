#include "sar2rgb/curation/curation.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "sar2rgb/error.hpp"
#include "sar2rgb/rng.hpp"

namespace sar2rgb::curation {

namespace fs = std::filesystem;
using rastercore::BandRole;

void PairPolicy::validate() const {
  if (max_day_gap < 0) throw InvalidArgument("max_day_gap must be >= 0");
}

int parse_iso_date(std::string_view date) {
  auto bad = [&] { return InvalidArgument("invalid ISO date '" + std::string(date) + "'"); };
  if (date.size() != 10 || date[4] != '-' || date[7] != '-') throw bad();
  auto field = [&](std::size_t pos, std::size_t len) {
    int v = 0;
    const auto* first = date.data() + pos;
    auto [ptr, ec] = std::from_chars(first, first + len, v);
    if (ec != std::errc{} || ptr != first + len) throw bad();
    return v;
  };
  const std::chrono::year_month_day ymd{std::chrono::year{field(0, 4)},
                                        std::chrono::month{static_cast<unsigned>(field(5, 2))},
                                        std::chrono::day{static_cast<unsigned>(field(8, 2))}};
  if (!ymd.ok()) throw bad();
  return std::chrono::sys_days{ymd}.time_since_epoch().count();
}

PairingResult pair_manifests(std::span<const TileRecord> s1_records, std::span<const TileRecord> s2_records,
                             const PairPolicy& policy, std::span<const TileRecord> qa60_records) {
  policy.validate();
  const bool by_date = policy.match_key == MatchKey::TileIdAndDate;
  using Key = std::pair<std::string, std::string>;
  auto key_of = [&](const TileRecord& r) {
    return Key{r.meta.tile_id, by_date ? r.meta.acquired_date : std::string()};
  };
  auto check_unique = [&](std::span<const TileRecord> records, const char* sensor) {
    std::set<Key> seen;
    for (const auto& r : records) {
      if (!seen.insert(key_of(r)).second) {
        throw InvalidArgument(std::string("duplicate ") + sensor + " record for tile '" + r.meta.tile_id + "'" +
                              (by_date ? " dated '" + r.meta.acquired_date + "'" : std::string()));
      }
    }
  };
  check_unique(s1_records, "S1");
  check_unique(s2_records, "S2");

  // tile_id -> (day, index) of S1 records, sorted by day.
  std::map<std::string, std::vector<std::pair<int, std::size_t>>> s1_by_tile;
  for (std::size_t i = 0; i < s1_records.size(); ++i) {
    const int day = by_date ? parse_iso_date(s1_records[i].meta.acquired_date) : 0;
    s1_by_tile[s1_records[i].meta.tile_id].emplace_back(day, i);
  }
  for (auto& [_, v] : s1_by_tile) std::sort(v.begin(), v.end());

  std::map<Key, std::size_t> qa_by_key;
  for (std::size_t i = 0; i < qa60_records.size(); ++i) {
    qa_by_key.emplace(Key{qa60_records[i].meta.tile_id, qa60_records[i].meta.acquired_date}, i);
  }

  PairingResult result;
  std::vector<bool> s1_used(s1_records.size(), false);
  for (const auto& s2 : s2_records) {
    const auto it = s1_by_tile.find(s2.meta.tile_id);
    std::optional<std::size_t> match;
    if (it != s1_by_tile.end()) {
      if (!by_date) {
        match = it->second.front().second;
      } else {
        const int day = parse_iso_date(s2.meta.acquired_date);
        int best_gap = std::numeric_limits<int>::max();
        // Ascending day order, strict improvement: ties keep the earlier date.
        for (const auto& [s1_day, idx] : it->second) {
          const int gap = std::abs(s1_day - day);
          if (gap <= policy.max_day_gap && gap < best_gap) {
            best_gap = gap;
            match = idx;
          }
        }
      }
    }
    if (!match) {
      ++result.unmatched_s2;
      continue;
    }
    s1_used[*match] = true;
    PairRecord rec;
    rec.pair_id = by_date ? s2.meta.tile_id + "_" + s2.meta.acquired_date : s2.meta.tile_id;
    rec.s1_path = s1_records[*match].path;
    rec.s2_path = s2.path;
    if (const auto q = qa_by_key.find(Key{s2.meta.tile_id, s2.meta.acquired_date}); q != qa_by_key.end()) {
      rec.qa60_path = qa60_records[q->second].path;
    }
    result.pairs.push_back(std::move(rec));
  }
  result.unmatched_s1 = static_cast<std::size_t>(std::count(s1_used.begin(), s1_used.end(), false));
  return result;
}

void FilterSpec::validate() const {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(max_nodata_ratio) || (max_qa60_cloud_ratio && !in_unit(*max_qa60_cloud_ratio)) ||
      (max_heuristic_cloud_ratio && !in_unit(*max_heuristic_cloud_ratio))) {
    throw InvalidArgument("filter bounds must lie in [0, 1]");
  }
}

FilterSpec FilterSpec::preset(std::string_view name) {
  if (name == "dataset1") return dataset1();
  if (name == "dataset2") return dataset2();
  throw InvalidArgument("unknown filter preset '" + std::string(name) + "' (expected dataset1 or dataset2)");
}

std::vector<PairRecord> filter_dataset(std::span<const PairRecord> pairs, const FilterSpec& spec) {
  spec.validate();
  std::vector<PairRecord> kept;
  for (const auto& p : pairs) {
    if (!p.screen) throw InvalidArgument("pair '" + p.pair_id + "' has no screen report");
    const auto& s = *p.screen;
    if (spec.max_qa60_cloud_ratio && !s.qa60_cloud_ratio) {
      throw InvalidArgument("filter bounds the QA60 cloud ratio but pair '" + p.pair_id + "' has no QA60 report");
    }
    bool keep = s.nodata_ratio <= spec.max_nodata_ratio;
    if (spec.max_qa60_cloud_ratio) keep = keep && *s.qa60_cloud_ratio <= *spec.max_qa60_cloud_ratio;
    if (spec.max_heuristic_cloud_ratio) keep = keep && s.heuristic_cloud_ratio <= *spec.max_heuristic_cloud_ratio;
    if (keep) kept.push_back(p);
  }
  return kept;
}

std::vector<std::size_t> holdout_indices(std::size_t count, std::size_t n, std::uint64_t seed) {
  if (n > 0 && n >= count) {
    throw InvalidArgument("holdout size " + std::to_string(n) + " must be smaller than the " + std::to_string(count) +
                          " available pairs");
  }
  SplitMix64 rng(seed);
  auto perm = fisher_yates(count, rng);
  perm.resize(n);
  std::sort(perm.begin(), perm.end());
  return perm;
}

HoldoutSplit split_holdout(std::span<const PairRecord> pairs, std::size_t n, std::uint64_t seed) {
  if (n >= pairs.size() && !(n == 0 && pairs.empty())) {
    throw InvalidArgument("holdout size " + std::to_string(n) + " must be smaller than the " +
                          std::to_string(pairs.size()) + " available pairs");
  }
  const auto eval_idx = holdout_indices(pairs.size(), n, seed);
  std::vector<bool> in_eval(pairs.size(), false);
  for (auto i : eval_idx) in_eval[i] = true;
  HoldoutSplit split;
  for (std::size_t i = 0; i < pairs.size(); ++i) (in_eval[i] ? split.eval : split.train).push_back(pairs[i]);
  return split;
}

Tile normalize_s2_reflectance(const Tile& raw) {
  if (!raw.has_roles(rastercore::rgb_roles())) {
    throw InvalidArgument("normalize_s2_reflectance expects band roles [RED, GREEN, BLUE]");
  }
  std::vector<float> out(raw.data().begin(), raw.data().end());
  for (auto& v : out) {
    if (v < 0.0f) throw InvalidArgument("negative Sentinel-2 digital number in '" + raw.meta().tile_id + "'");
    v = std::min(v / kReflectanceScale, 1.0f);
  }
  auto meta = raw.meta();
  meta.nodata_sentinel = std::clamp(meta.nodata_sentinel / kReflectanceScale, 0.0f, 1.0f);
  return Tile(raw.band_roles(), raw.height(), raw.width(), std::move(meta), std::move(out));
}

ModelArray normalize_s1(const Tile& db_tile, const SarRange& range) {
  if (!db_tile.has_roles(rastercore::sar_roles())) throw InvalidArgument("normalize_s1 expects band roles [VV, VH]");
  if (!(range.max_db > range.min_db)) throw InvalidArgument("SAR dB range must be non-empty");
  const float half_span = (range.max_db - range.min_db) / 2.0f;
  ModelArray out{2, db_tile.height(), db_tile.width(), {}};
  out.data.reserve(db_tile.data().size());
  for (float v : db_tile.data()) {
    if (std::isnan(v)) throw InvalidArgument("NaN backscatter value");
    const float c = std::clamp(v, range.min_db, range.max_db);
    out.data.push_back((c - range.min_db) / half_span - 1.0f);
  }
  return out;
}

namespace {
constexpr float kRangeSlack = 1e-6f;
}

ModelArray rgb_to_model(const Tile& reflectance) {
  if (!reflectance.has_roles(rastercore::rgb_roles())) throw InvalidArgument("rgb_to_model expects RGB roles");
  ModelArray out{3, reflectance.height(), reflectance.width(), {}};
  out.data.reserve(reflectance.data().size());
  for (float v : reflectance.data()) {
    if (v < -kRangeSlack || v > 1.0f + kRangeSlack) throw InvalidArgument("reflectance outside [0, 1]");
    out.data.push_back(2.0f * v - 1.0f);
  }
  return out;
}

Tile model_to_rgb(const ModelArray& model, TileMeta meta) {
  if (model.channels != 3) throw InvalidArgument("model_to_rgb expects 3 channels");
  if (model.data.size() != static_cast<std::size_t>(3) * model.height * model.width) {
    throw InvalidArgument("model array size does not match its shape");
  }
  std::vector<float> out;
  out.reserve(model.data.size());
  for (float v : model.data) {
    if (!(v >= -1.0f - kRangeSlack && v <= 1.0f + kRangeSlack)) throw InvalidArgument("model value outside [-1, 1]");
    out.push_back(std::clamp((v + 1.0f) / 2.0f, 0.0f, 1.0f));
  }
  meta.sensor = rastercore::Sensor::S2;
  return Tile(rastercore::rgb_roles(), model.height, model.width, std::move(meta), std::move(out));
}

void to_json(nlohmann::json& j, const PairRecord& r) {
  j = nlohmann::json{{"pair_id", r.pair_id},
                     {"s1_path", r.s1_path.generic_string()},
                     {"s2_path", r.s2_path.generic_string()},
                     {"qa60_path", r.qa60_path ? nlohmann::json(r.qa60_path->generic_string()) : nlohmann::json()}};
  if (r.screen) j["screen"] = *r.screen;
}

void from_json(const nlohmann::json& j, PairRecord& r) {
  r.pair_id = j.at("pair_id").get<std::string>();
  rastercore::validate_tile_id(r.pair_id);
  r.s1_path = j.at("s1_path").get<std::string>();
  r.s2_path = j.at("s2_path").get<std::string>();
  const auto q = j.find("qa60_path");
  r.qa60_path = (q == j.end() || q->is_null()) ? std::nullopt : std::optional<fs::path>(q->get<std::string>());
  const auto s = j.find("screen");
  r.screen = (s == j.end() || s->is_null()) ? std::nullopt : std::optional<ScreenReport>(s->get<ScreenReport>());
}

namespace {

fs::path manifest_dir(const fs::path& manifest) {
  return fs::absolute(manifest).parent_path().lexically_normal();
}

fs::path resolve(const fs::path& p, const fs::path& dir) {
  return p.is_absolute() ? p : (dir / p).lexically_normal();
}

fs::path relativize(const fs::path& p, const fs::path& dir) {
  const auto abs = fs::absolute(p).lexically_normal();
  auto rel = abs.lexically_relative(dir);
  return rel.empty() ? abs : rel;
}

}  // namespace

std::vector<PairRecord> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  const auto dir = manifest_dir(path);
  std::vector<PairRecord> pairs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto rec = nlohmann::json::parse(line).get<PairRecord>();
      rec.s1_path = resolve(rec.s1_path, dir);
      rec.s2_path = resolve(rec.s2_path, dir);
      if (rec.qa60_path) rec.qa60_path = resolve(*rec.qa60_path, dir);
      pairs.push_back(std::move(rec));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return pairs;
}

void write_manifest(std::span<const PairRecord> pairs, const fs::path& path) {
  const auto dir = manifest_dir(path);
  std::string text;
  for (auto rec : pairs) {
    rec.s1_path = relativize(rec.s1_path, dir);
    rec.s2_path = relativize(rec.s2_path, dir);
    if (rec.qa60_path) rec.qa60_path = relativize(*rec.qa60_path, dir);
    text += nlohmann::json(rec).dump();
    text += '\n';
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write manifest '" + path.string() + "'");
  out << text;
}

}  // namespace sar2rgb::curation
