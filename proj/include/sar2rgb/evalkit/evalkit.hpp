#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sar2rgb/rastercore/tile.hpp"

namespace sar2rgb::evalkit {

using rastercore::Tile;

inline constexpr double kPsnrCapDb = 99.0;
inline constexpr double kPsnrCapMse = 1e-12;

struct Prediction {
  std::string pair_id;
  Tile tile;
};
using PredictionSet = std::vector<Prediction>;

// Mean absolute error over all 3*H*W elements of two [0, 1] RGB tiles.
double mae(const Tile& pred, const Tile& target);
// 10 * log10(1 / mse) with peak 1.0; 99 dB when mse < 1e-12.
double psnr(const Tile& pred, const Tile& target);

struct ImageMetrics {
  std::string pair_id;
  double mae = 0.0;
  double psnr_db = 0.0;
  bool operator==(const ImageMetrics&) const = default;
};

struct MetricsReport {
  std::size_t n_images = 0;
  double mae_mean = 0.0;
  double psnr_mean_db = 0.0;
  std::vector<ImageMetrics> per_image;  // sorted by pair_id
  bool operator==(const MetricsReport&) const = default;
};

// Per-image metrics, then unweighted means over images.
MetricsReport evaluate(const PredictionSet& preds, const PredictionSet& refs);

enum class EnsembleMode { Mean, Assign };

struct EnsembleSpec {
  std::vector<std::string> members;
  EnsembleMode mode = EnsembleMode::Mean;
  std::map<std::string, std::string> assignment;  // pair_id -> member, Assign only
};

// Mean: per pixel arithmetic mean across members, clamped to [0, 1]; the
// per-pixel sum is taken over sorted values so the result does not depend on
// member order. Assign: each pair takes its assigned member's tile.
// Output is sorted by pair_id.
PredictionSet ensemble(const std::map<std::string, PredictionSet>& outputs, const EnsembleSpec& spec);

struct SubmissionSummary {
  std::size_t count = 0;
  std::uint32_t crc32 = 0;  // over tile-file bytes concatenated in sorted pair_id order
};

// Writes <pair_id>.s2tl per prediction, submission.jsonl (one entry per
// tile) and summary.json ({"count", "crc32"}). Reruns are byte-identical.
SubmissionSummary package_submission(const PredictionSet& preds, const std::filesystem::path& out_dir);

PredictionSet load_prediction_dir(const std::filesystem::path& dir);

void to_json(nlohmann::json& j, const MetricsReport& r);
void from_json(const nlohmann::json& j, MetricsReport& r);
void to_json(nlohmann::json& j, const EnsembleSpec& s);
void from_json(const nlohmann::json& j, EnsembleSpec& s);
EnsembleMode parse_ensemble_mode(const std::string& name);

}  // namespace sar2rgb::evalkit
