#pragma once

#include <cstdint>

#include <json.hpp>

#include "sar2rgb/curation/curation.hpp"
#include "sar2rgb/sargen/config.hpp"

namespace sar2rgb::trainer {

struct OptimizerConfig {
  double learning_rate = 2e-4;
  double beta1 = 0.0;  // 0.0 for SPADE, 0.5 for pix2pixHD unless set
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool operator==(const OptimizerConfig&) const = default;
};

struct TrainConfig {
  sargen::GeneratorConfig generator;
  sargen::DiscriminatorConfig discriminator;  // unused when loss.gan_weight == 0
  sargen::LossConfig loss;
  OptimizerConfig optimizer;
  curation::SarRange sar_range;
  int batch_size = 4;
  std::int64_t max_steps = 1000;
  std::uint64_t seed = 0;
  std::int64_t eval_every = 0;  // 0 disables periodic evaluation
  // Kernels here are single-threaded and always reproducible; the flag is
  // carried so configs and checkpoints record the requested contract.
  bool deterministic = true;

  void validate() const;
  bool operator==(const TrainConfig& o) const;

  // Lineage defaults: SPADE uses hinge loss and beta1 = 0, pix2pixHD LSGAN
  // and beta1 = 0.5.
  static TrainConfig defaults_for(sargen::Variant variant);
};

void to_json(nlohmann::json& j, const TrainConfig& c);
// Missing keys take lineage defaults; unknown keys are rejected.
void from_json(const nlohmann::json& j, TrainConfig& c);

}  // namespace sar2rgb::trainer
