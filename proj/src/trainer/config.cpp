#include "sar2rgb/trainer/config.hpp"

#include <set>
#include <string>

#include "sar2rgb/error.hpp"

namespace sar2rgb::trainer {

void TrainConfig::validate() const {
  generator.validate();
  loss.validate();
  if (loss.uses_gan()) discriminator.validate();
  if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  if (max_steps < 0) throw InvalidArgument("max_steps must be >= 0");
  if (eval_every < 0) throw InvalidArgument("eval_every must be >= 0");
  if (!(optimizer.learning_rate > 0.0)) throw InvalidArgument("learning_rate must be positive");
  if (!(optimizer.beta1 >= 0.0 && optimizer.beta1 < 1.0) || !(optimizer.beta2 >= 0.0 && optimizer.beta2 < 1.0)) {
    throw InvalidArgument("Adam betas must lie in [0, 1)");
  }
  if (!(optimizer.epsilon > 0.0)) throw InvalidArgument("Adam epsilon must be positive");
  if (!(sar_range.max_db > sar_range.min_db)) throw InvalidArgument("SAR dB range must be non-empty");
}

bool TrainConfig::operator==(const TrainConfig& o) const {
  return generator == o.generator && discriminator == o.discriminator && loss == o.loss &&
         optimizer == o.optimizer && sar_range.min_db == o.sar_range.min_db &&
         sar_range.max_db == o.sar_range.max_db && batch_size == o.batch_size && max_steps == o.max_steps &&
         seed == o.seed && eval_every == o.eval_every && deterministic == o.deterministic;
}

TrainConfig TrainConfig::defaults_for(sargen::Variant variant) {
  TrainConfig c;
  c.generator.variant = variant;
  c.loss.gan_kind = sargen::default_gan_kind(variant);
  c.optimizer.beta1 = variant == sargen::Variant::Spade ? 0.0 : 0.5;
  return c;
}

namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& what) {
  if (!j.is_object()) throw InvalidArgument(what + " must be a JSON object");
  for (const auto& [k, _] : j.items()) {
    if (!allowed.contains(k)) throw InvalidArgument("unknown key '" + k + "' in " + what);
  }
}

template <typename V>
void read_opt(const nlohmann::json& j, const char* key, V& out) {
  if (const auto it = j.find(key); it != j.end()) out = it->get<V>();
}

}  // namespace

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"generator", c.generator},
                     {"discriminator", c.discriminator},
                     {"loss", c.loss},
                     {"optimizer",
                      {{"learning_rate", c.optimizer.learning_rate},
                       {"beta1", c.optimizer.beta1},
                       {"beta2", c.optimizer.beta2},
                       {"epsilon", c.optimizer.epsilon}}},
                     {"sar_range", {{"min_db", c.sar_range.min_db}, {"max_db", c.sar_range.max_db}}},
                     {"batch_size", c.batch_size},
                     {"max_steps", c.max_steps},
                     {"seed", c.seed},
                     {"eval_every", c.eval_every},
                     {"deterministic", c.deterministic}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  reject_unknown(j,
                 {"generator", "discriminator", "loss", "optimizer", "sar_range", "batch_size", "max_steps", "seed",
                  "eval_every", "deterministic"},
                 "train config");
  sargen::GeneratorConfig gen;
  read_opt(j, "generator", gen);
  TrainConfig d = TrainConfig::defaults_for(gen.variant);
  d.generator = gen;
  read_opt(j, "discriminator", d.discriminator);
  if (const auto it = j.find("loss"); it != j.end()) {
    auto loss_json = *it;
    if (!loss_json.is_object()) throw InvalidArgument("loss config must be a JSON object");
    if (!loss_json.contains("gan_kind")) loss_json["gan_kind"] = sargen::to_string(d.loss.gan_kind);
    d.loss = loss_json.get<sargen::LossConfig>();
  }
  if (const auto it = j.find("optimizer"); it != j.end()) {
    reject_unknown(*it, {"learning_rate", "beta1", "beta2", "epsilon"}, "optimizer config");
    read_opt(*it, "learning_rate", d.optimizer.learning_rate);
    read_opt(*it, "beta1", d.optimizer.beta1);
    read_opt(*it, "beta2", d.optimizer.beta2);
    read_opt(*it, "epsilon", d.optimizer.epsilon);
  }
  if (const auto it = j.find("sar_range"); it != j.end()) {
    reject_unknown(*it, {"min_db", "max_db"}, "sar_range");
    read_opt(*it, "min_db", d.sar_range.min_db);
    read_opt(*it, "max_db", d.sar_range.max_db);
  }
  read_opt(j, "batch_size", d.batch_size);
  read_opt(j, "max_steps", d.max_steps);
  read_opt(j, "seed", d.seed);
  read_opt(j, "eval_every", d.eval_every);
  read_opt(j, "deterministic", d.deterministic);
  d.validate();
  c = d;
}

}  // namespace sar2rgb::trainer
