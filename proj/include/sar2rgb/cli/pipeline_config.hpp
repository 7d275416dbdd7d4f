#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "sar2rgb/cloudscreen/cloudscreen.hpp"
#include "sar2rgb/curation/curation.hpp"
#include "sar2rgb/evalkit/evalkit.hpp"
#include "sar2rgb/trainer/config.hpp"

namespace sar2rgb::cli {

// One JSON document with defaults for every subcommand. Command-line flags
// override individual values.
struct PipelineConfig {
  std::optional<std::filesystem::path> in;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<std::string> preset;
  std::optional<bool> deterministic;
  cloudscreen::HeuristicParams heuristic;
  curation::PairPolicy pair_policy;
  std::optional<trainer::TrainConfig> train;
  std::optional<evalkit::EnsembleSpec> ensemble;
};

// Relative paths resolve against the config file's directory; `in` must
// exist. Unknown keys are rejected.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
PipelineConfig parse_pipeline_config(const nlohmann::json& j, const std::filesystem::path& base_dir);

curation::MatchKey parse_match_key(const std::string& name);
std::string to_string(curation::MatchKey key);

}  // namespace sar2rgb::cli

namespace sar2rgb::curation {

void to_json(nlohmann::json& j, const PairPolicy& p);
void from_json(const nlohmann::json& j, PairPolicy& p);

}  // namespace sar2rgb::curation
