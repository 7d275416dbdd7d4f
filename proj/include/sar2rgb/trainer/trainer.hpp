#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sar2rgb/curation/curation.hpp"
#include "sar2rgb/evalkit/evalkit.hpp"
#include "sar2rgb/sargen/models.hpp"
#include "sar2rgb/trainer/checkpoint.hpp"
#include "sar2rgb/trainer/config.hpp"

namespace sar2rgb::trainer {

// One curated pair in model space, plus the reflectance target for metrics.
struct TrainingPair {
  std::string pair_id;
  curation::ModelArray s1;   // [2, S, S] in [-1, 1]
  curation::ModelArray rgb;  // [3, S, S] in [-1, 1]
  rastercore::Tile reference;
};

TrainingPair make_training_pair(const rastercore::Tile& s1_db, const rastercore::Tile& s2_raw,
                                const curation::SarRange& range = {});
std::vector<TrainingPair> load_training_pairs(std::span<const curation::PairRecord> records,
                                              const curation::SarRange& range = {});

struct TraceRecord {
  std::int64_t step = 0;
  double generator_total = 0.0;
  std::optional<double> gan_term;
  double l1_term = 0.0;
  std::optional<double> discriminator_loss;
  std::optional<double> eval_mae;
  std::optional<double> eval_psnr_db;
  bool operator==(const TraceRecord&) const = default;
};

struct LossTrace {
  std::vector<TraceRecord> records;  // strictly increasing steps

  void append(const LossTrace& more);
  std::string to_jsonl() const;
  static LossTrace from_jsonl(const std::string& text);
};

void to_json(nlohmann::json& j, const TraceRecord& r);
void from_json(const nlohmann::json& j, TraceRecord& r);

/// Owns one training run: generator, optional discriminator, Adam moments
/// and the batch sampler. Each step with a GAN term performs one
/// discriminator update (real pair vs detached fake) and then one generator
/// update; without it, a plain supervised update on the weighted L1 loss.
class Trainer {
 public:
  Trainer(TrainConfig config, std::vector<TrainingPair> train_pairs, std::vector<TrainingPair> eval_pairs = {});
  // Resumes from a checkpoint on the same data.
  Trainer(const Checkpoint& checkpoint, std::vector<TrainingPair> train_pairs,
          std::vector<TrainingPair> eval_pairs = {});
  ~Trainer();
  Trainer(Trainer&&) noexcept;
  Trainer& operator=(Trainer&&) noexcept;

  // Trains until step() == target_step and returns the records produced.
  LossTrace run_until(std::int64_t target_step);
  LossTrace run() { return run_until(config().max_steps); }

  std::int64_t step() const;
  const TrainConfig& config() const;
  const sargen::Generator<float>& generator() const;
  bool has_discriminator() const;
  Checkpoint checkpoint() const;

  // Per-tile inference on the given pairs, scored against their references.
  evalkit::MetricsReport evaluate(std::span<const TrainingPair> pairs) const;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

// Trains from scratch for config.max_steps.
std::pair<Checkpoint, LossTrace> train(const TrainConfig& config, std::vector<TrainingPair> train_pairs,
                                       std::vector<TrainingPair> eval_pairs = {});

sargen::Generator<float> generator_from_checkpoint(const Checkpoint& ckpt);

// normalize_s1 -> generate -> model_to_rgb for each tile (batch of one, so a
// tile's output never depends on its neighbours). `jobs` > 1 spreads tiles
// over threads; output order follows input order.
std::vector<rastercore::Tile> infer(const Checkpoint& ckpt, std::span<const rastercore::Tile> s1_tiles, int jobs = 1);
std::vector<rastercore::Tile> infer(const sargen::Generator<float>& g, const curation::SarRange& range,
                                    std::span<const rastercore::Tile> s1_tiles, int jobs = 1);

}  // namespace sar2rgb::trainer
