#include "sar2rgb/cli/pipeline_config.hpp"

#include <set>

#include "sar2rgb/detail/bytes.hpp"
#include "sar2rgb/error.hpp"

namespace sar2rgb::cli {

namespace fs = std::filesystem;

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw InvalidArgument(where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw InvalidArgument("unknown key '" + key + "' in " + where);
  }
}

curation::MatchKey parse_match_key(const std::string& name) {
  if (name == "tile_id") return curation::MatchKey::TileId;
  if (name == "tile_id_and_date") return curation::MatchKey::TileIdAndDate;
  throw InvalidArgument("unknown match key '" + name + "' (expected tile_id or tile_id_and_date)");
}

std::string to_string(curation::MatchKey key) {
  return key == curation::MatchKey::TileId ? "tile_id" : "tile_id_and_date";
}

PipelineConfig parse_pipeline_config(const nlohmann::json& j, const fs::path& base_dir) {
  reject_unknown(j,
                 {"in", "out", "seed", "jobs", "preset", "deterministic", "heuristic", "pair_policy", "train",
                  "ensemble"},
                 "pipeline config");
  auto resolve = [&](const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  PipelineConfig c;
  if (j.contains("in")) {
    c.in = resolve(j.at("in").get<std::string>());
    if (!fs::exists(*c.in)) throw IoError("config input path '" + c.in->string() + "' does not exist");
  }
  if (j.contains("out")) c.out = resolve(j.at("out").get<std::string>());
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("jobs")) {
    c.jobs = j.at("jobs").get<int>();
    if (*c.jobs < 1) throw InvalidArgument("jobs must be at least 1");
  }
  if (j.contains("preset")) {
    c.preset = j.at("preset").get<std::string>();
    curation::FilterSpec::preset(*c.preset);
  }
  if (j.contains("deterministic")) c.deterministic = j.at("deterministic").get<bool>();
  if (j.contains("heuristic")) {
    c.heuristic = j.at("heuristic").get<cloudscreen::HeuristicParams>();
    c.heuristic.validate();
  }
  if (j.contains("pair_policy")) c.pair_policy = j.at("pair_policy").get<curation::PairPolicy>();
  if (j.contains("train")) c.train = j.at("train").get<trainer::TrainConfig>();
  if (j.contains("ensemble")) c.ensemble = j.at("ensemble").get<evalkit::EnsembleSpec>();
  return c;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  const auto bytes = detail::read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  try {
    return parse_pipeline_config(j, path.parent_path());
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("config '" + path.string() + "': " + e.what());
  }
}

}  // namespace sar2rgb::cli

namespace sar2rgb::curation {

void to_json(nlohmann::json& j, const PairPolicy& p) {
  j = nlohmann::json{{"match_key", cli::to_string(p.match_key)}, {"max_day_gap", p.max_day_gap}};
}

void from_json(const nlohmann::json& j, PairPolicy& p) {
  cli::reject_unknown(j, {"match_key", "max_day_gap"}, "pair_policy");
  p = {};
  if (j.contains("match_key")) p.match_key = cli::parse_match_key(j.at("match_key").get<std::string>());
  if (j.contains("max_day_gap")) p.max_day_gap = j.at("max_day_gap").get<int>();
  p.validate();
}

}  // namespace sar2rgb::curation
