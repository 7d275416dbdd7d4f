#include "sar2rgb/trainer/trainer.hpp"

#include <cmath>
#include <sstream>
#include <thread>

#include "sar2rgb/error.hpp"
#include "sar2rgb/rastercore/tile_io.hpp"
#include "sar2rgb/rng.hpp"
#include "sar2rgb/sargen/losses.hpp"

namespace sar2rgb::trainer {

using nn::Shape;
using nn::Var;
using sargen::Discriminator;
using sargen::Generator;
using sargen::ParamList;

TrainingPair make_training_pair(const rastercore::Tile& s1_db, const rastercore::Tile& s2_raw,
                                const curation::SarRange& range) {
  if (s1_db.height() != s2_raw.height() || s1_db.width() != s2_raw.width()) {
    throw InvalidArgument("S1 tile '" + s1_db.meta().tile_id + "' and S2 tile '" + s2_raw.meta().tile_id +
                          "' differ in size");
  }
  auto reflectance = curation::normalize_s2_reflectance(s2_raw);
  auto rgb = curation::rgb_to_model(reflectance);
  return {s2_raw.meta().tile_id, curation::normalize_s1(s1_db, range), std::move(rgb), std::move(reflectance)};
}

std::vector<TrainingPair> load_training_pairs(std::span<const curation::PairRecord> records,
                                              const curation::SarRange& range) {
  std::vector<TrainingPair> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    auto pair = make_training_pair(rastercore::read_tile(r.s1_path), rastercore::read_tile(r.s2_path), range);
    pair.pair_id = r.pair_id;
    out.push_back(std::move(pair));
  }
  return out;
}

void LossTrace::append(const LossTrace& more) {
  for (const auto& r : more.records) {
    if (!records.empty() && r.step <= records.back().step) throw InvalidArgument("loss trace steps must increase");
    records.push_back(r);
  }
}

namespace {

nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }
std::optional<double> opt_value(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

}  // namespace

void to_json(nlohmann::json& j, const TraceRecord& r) {
  j = nlohmann::json{{"step", r.step},
                     {"generator_total", r.generator_total},
                     {"gan_term", opt_json(r.gan_term)},
                     {"l1_term", r.l1_term},
                     {"discriminator_loss", opt_json(r.discriminator_loss)},
                     {"eval_mae", opt_json(r.eval_mae)},
                     {"eval_psnr_db", opt_json(r.eval_psnr_db)}};
}

void from_json(const nlohmann::json& j, TraceRecord& r) {
  r.step = j.at("step").get<std::int64_t>();
  r.generator_total = j.at("generator_total").get<double>();
  r.gan_term = opt_value(j, "gan_term");
  r.l1_term = j.at("l1_term").get<double>();
  r.discriminator_loss = opt_value(j, "discriminator_loss");
  r.eval_mae = opt_value(j, "eval_mae");
  r.eval_psnr_db = opt_value(j, "eval_psnr_db");
}

std::string LossTrace::to_jsonl() const {
  std::string out;
  for (const auto& r : records) out += nlohmann::json(r).dump() + "\n";
  return out;
}

LossTrace LossTrace::from_jsonl(const std::string& text) {
  LossTrace trace;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    LossTrace one;
    one.records.push_back(nlohmann::json::parse(line).get<TraceRecord>());
    trace.append(one);
  }
  return trace;
}

namespace {

struct Adam {
  std::int64_t t = 0;
  std::vector<std::vector<float>> m;
  std::vector<std::vector<float>> v;

  explicit Adam(const ParamList<float>& params) {
    for (const auto& p : params) {
      m.emplace_back(p.var.shape().size(), 0.0f);
      v.emplace_back(p.var.shape().size(), 0.0f);
    }
  }

  void step(ParamList<float>& params, const OptimizerConfig& cfg) {
    ++t;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    const auto b1 = static_cast<float>(cfg.beta1), b2 = static_cast<float>(cfg.beta2);
    const auto step_size = static_cast<float>(cfg.learning_rate / bc1);
    const auto inv_bc2 = static_cast<float>(1.0 / bc2);
    const auto eps = static_cast<float>(cfg.epsilon);
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& var = params[i].var;
      auto w = var.mutable_value();
      const auto g = var.grad();
      if (g.empty()) continue;
      auto& mi = m[i];
      auto& vi = v[i];
      for (std::size_t k = 0; k < w.size(); ++k) {
        mi[k] = b1 * mi[k] + (1.0f - b1) * g[k];
        vi[k] = b2 * vi[k] + (1.0f - b2) * g[k] * g[k];
        w[k] -= step_size * mi[k] / (std::sqrt(vi[k] * inv_bc2) + eps);
      }
    }
  }

  AdamState save(const ParamList<float>& params) const {
    AdamState s;
    s.t = t;
    for (std::size_t i = 0; i < params.size(); ++i) {
      const Shape sh = params[i].var.shape();
      s.m.push_back({params[i].name, {sh.n, sh.c, sh.h, sh.w}, m[i]});
      s.v.push_back({params[i].name, {sh.n, sh.c, sh.h, sh.w}, v[i]});
    }
    return s;
  }

  void load(const AdamState& s, const ParamList<float>& params) {
    if (s.m.size() != params.size() || s.v.size() != params.size()) {
      throw InvalidArgument("optimizer state does not match the model");
    }
    t = s.t;
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (s.m[i].name != params[i].name || s.m[i].data.size() != m[i].size() || s.v[i].data.size() != v[i].size()) {
        throw InvalidArgument("optimizer moment '" + s.m[i].name + "' does not match the model");
      }
      m[i] = s.m[i].data;
      v[i] = s.v[i].data;
    }
  }
};

void zero_grads(ParamList<float>& params) {
  for (auto& p : params) p.var.zero_grad();
}

void set_requires_grad(ParamList<float>& params, bool on) {
  for (auto& p : params) p.var.node()->requires_grad = on;
}

// Batch order for epoch e is a Fisher-Yates permutation driven by
// SplitMix64 seeded with seed XOR (golden-ratio constant * (e + 1)).
std::uint64_t epoch_seed(std::uint64_t seed, std::uint64_t epoch) {
  return seed ^ (0x9E3779B97F4A7C15ULL * (epoch + 1));
}

void require_finite(double v, std::int64_t step, const char* what) {
  if (!std::isfinite(v)) throw NonFiniteLoss(step, what);
}

}  // namespace

struct Trainer::State {
  TrainConfig config;
  std::vector<TrainingPair> train;
  std::vector<TrainingPair> eval;
  Generator<float> generator;
  std::optional<Discriminator<float>> discriminator;
  ParamList<float> g_params;
  ParamList<float> d_params;
  Adam g_opt;
  std::optional<Adam> d_opt;
  std::int64_t step = 0;
  SamplerState sampler;
  std::vector<std::size_t> permutation;

  State(TrainConfig cfg, std::vector<TrainingPair> train_pairs, std::vector<TrainingPair> eval_pairs)
      : config(std::move(cfg)),
        train(std::move(train_pairs)),
        eval(std::move(eval_pairs)),
        generator(config.generator, config.seed),
        g_params(generator.parameters()),
        g_opt(g_params) {
    if (config.loss.uses_gan()) {
      discriminator.emplace(config.discriminator, config.generator.in_channels + config.generator.out_channels,
                            config.seed);
      d_params = discriminator->parameters();
      d_opt.emplace(d_params);
    }
  }

  void validate_data() const {
    if (train.empty()) throw InvalidArgument("training set is empty");
    const int s = config.generator.image_size;
    auto check = [&](const TrainingPair& p) {
      if (p.s1.channels != config.generator.in_channels || p.rgb.channels != config.generator.out_channels ||
          p.s1.height != s || p.s1.width != s || p.rgb.height != s || p.rgb.width != s) {
        throw InvalidArgument("pair '" + p.pair_id + "' does not match the configured image size " +
                              std::to_string(s));
      }
    };
    for (const auto& p : train) check(p);
    for (const auto& p : eval) check(p);
  }

  void refresh_permutation() {
    SplitMix64 rng(epoch_seed(config.seed, sampler.epoch));
    permutation = fisher_yates(train.size(), rng);
  }

  std::vector<std::size_t> next_batch() {
    std::vector<std::size_t> batch;
    while (batch.size() < static_cast<std::size_t>(config.batch_size)) {
      if (sampler.cursor >= train.size()) {
        ++sampler.epoch;
        sampler.cursor = 0;
        refresh_permutation();
      }
      batch.push_back(permutation[sampler.cursor++]);
    }
    return batch;
  }

  std::pair<Var<float>, Var<float>> assemble(const std::vector<std::size_t>& batch) const {
    const auto& g = config.generator;
    const int s = g.image_size;
    std::vector<float> s1, rgb;
    s1.reserve(batch.size() * g.in_channels * s * s);
    rgb.reserve(batch.size() * g.out_channels * s * s);
    for (auto i : batch) {
      s1.insert(s1.end(), train[i].s1.data.begin(), train[i].s1.data.end());
      rgb.insert(rgb.end(), train[i].rgb.data.begin(), train[i].rgb.data.end());
    }
    const int n = static_cast<int>(batch.size());
    return {Var<float>::constant(Shape{n, g.in_channels, s, s}, std::move(s1)),
            Var<float>::constant(Shape{n, g.out_channels, s, s}, std::move(rgb))};
  }

  TraceRecord train_step() {
    const std::int64_t this_step = step + 1;
    const auto [s1, real] = assemble(next_batch());
    TraceRecord rec;
    rec.step = this_step;

    const auto fake = generator.forward(s1);
    Var<float> gan_term;
    if (discriminator) {
      const auto fake_detached = fake.detach();
      set_requires_grad(d_params, true);
      zero_grads(d_params);
      const auto d_loss = nn::weighted_sum<float>(
          {sargen::gan_loss(discriminator->forward(s1, real), sargen::GanRole::DReal, config.loss.gan_kind),
           sargen::gan_loss(discriminator->forward(s1, fake_detached), sargen::GanRole::DFake, config.loss.gan_kind)},
          {1.0f, 1.0f});
      rec.discriminator_loss = d_loss.item();
      require_finite(*rec.discriminator_loss, this_step, "discriminator loss");
      d_loss.backward();
      d_opt->step(d_params, config.optimizer);

      // Generator pass sees the updated discriminator but leaves it untouched.
      set_requires_grad(d_params, false);
      gan_term = sargen::gan_loss(discriminator->forward(s1, fake), sargen::GanRole::G, config.loss.gan_kind);
      rec.gan_term = gan_term.item();
    }
    const auto l1 = sargen::l1_loss(fake, real);
    const auto total = sargen::total_generator_loss(config.loss, gan_term, l1);
    rec.l1_term = l1.item();
    rec.generator_total = total.item();
    require_finite(rec.generator_total, this_step, "generator loss");
    zero_grads(g_params);
    total.backward();
    g_opt.step(g_params, config.optimizer);
    step = this_step;

    if (config.eval_every > 0 && step % config.eval_every == 0 && !eval.empty()) {
      const auto report = evaluate_pairs(eval);
      rec.eval_mae = report.mae_mean;
      rec.eval_psnr_db = report.psnr_mean_db;
    }
    return rec;
  }

  evalkit::MetricsReport evaluate_pairs(std::span<const TrainingPair> pairs) const {
    evalkit::PredictionSet preds, refs;
    for (const auto& p : pairs) {
      const auto out = sargen::generate(generator, p.s1);
      preds.push_back({p.pair_id, curation::model_to_rgb(out, p.reference.meta())});
      refs.push_back({p.pair_id, p.reference});
    }
    return evalkit::evaluate(preds, refs);
  }
};

Trainer::Trainer(TrainConfig config, std::vector<TrainingPair> train_pairs, std::vector<TrainingPair> eval_pairs) {
  config.validate();
  state_ = std::make_unique<State>(std::move(config), std::move(train_pairs), std::move(eval_pairs));
  state_->validate_data();
  state_->refresh_permutation();
}

Trainer::Trainer(const Checkpoint& ckpt, std::vector<TrainingPair> train_pairs, std::vector<TrainingPair> eval_pairs)
    : Trainer(ckpt.config, std::move(train_pairs), std::move(eval_pairs)) {
  auto& s = *state_;
  sargen::import_tensors(s.g_params, ckpt.generator);
  s.g_opt.load(ckpt.generator_opt, s.g_params);
  if (s.discriminator) {
    if (!ckpt.discriminator || !ckpt.discriminator_opt) {
      throw InvalidArgument("checkpoint lacks discriminator state required by its loss config");
    }
    sargen::import_tensors(s.d_params, *ckpt.discriminator);
    s.d_opt->load(*ckpt.discriminator_opt, s.d_params);
  }
  s.step = ckpt.step;
  s.sampler = ckpt.sampler;
  if (s.sampler.cursor > s.train.size()) throw InvalidArgument("checkpoint sampler position exceeds the dataset");
  s.refresh_permutation();
}

Trainer::~Trainer() = default;
Trainer::Trainer(Trainer&&) noexcept = default;
Trainer& Trainer::operator=(Trainer&&) noexcept = default;

LossTrace Trainer::run_until(std::int64_t target_step) {
  LossTrace trace;
  while (state_->step < target_step) trace.records.push_back(state_->train_step());
  return trace;
}

std::int64_t Trainer::step() const { return state_->step; }
const TrainConfig& Trainer::config() const { return state_->config; }
const sargen::Generator<float>& Trainer::generator() const { return state_->generator; }
bool Trainer::has_discriminator() const { return state_->discriminator.has_value(); }

Checkpoint Trainer::checkpoint() const {
  const auto& s = *state_;
  Checkpoint c;
  c.config = s.config;
  c.step = s.step;
  c.generator = sargen::export_tensors(s.g_params);
  c.generator_opt = s.g_opt.save(s.g_params);
  if (s.discriminator) {
    c.discriminator = sargen::export_tensors(s.d_params);
    c.discriminator_opt = s.d_opt->save(s.d_params);
  }
  c.sampler = s.sampler;
  return c;
}

evalkit::MetricsReport Trainer::evaluate(std::span<const TrainingPair> pairs) const {
  return state_->evaluate_pairs(pairs);
}

std::pair<Checkpoint, LossTrace> train(const TrainConfig& config, std::vector<TrainingPair> train_pairs,
                                       std::vector<TrainingPair> eval_pairs) {
  Trainer trainer(config, std::move(train_pairs), std::move(eval_pairs));
  auto trace = trainer.run();
  return {trainer.checkpoint(), std::move(trace)};
}

Generator<float> generator_from_checkpoint(const Checkpoint& ckpt) {
  Generator<float> g(ckpt.config.generator, ckpt.config.seed);
  sargen::import_tensors(g.parameters(), ckpt.generator);
  return g;
}

std::vector<rastercore::Tile> infer(const Generator<float>& g, const curation::SarRange& range,
                                    std::span<const rastercore::Tile> s1_tiles, int jobs) {
  const int size = g.config().image_size;
  for (const auto& t : s1_tiles) {
    if (t.height() != size || t.width() != size) {
      throw InvalidArgument("tile '" + t.meta().tile_id + "' is " + std::to_string(t.height()) + "x" +
                            std::to_string(t.width()) + ", the checkpoint expects " + std::to_string(size) + "x" +
                            std::to_string(size));
    }
  }
  std::vector<std::optional<rastercore::Tile>> slots(s1_tiles.size());
  auto run_one = [&](std::size_t i) {
    const auto& t = s1_tiles[i];
    auto meta = t.meta();
    meta.sensor = rastercore::Sensor::S2;
    meta.nodata_sentinel = 0.0f;
    slots[i] = curation::model_to_rgb(sargen::generate(g, curation::normalize_s1(t, range)), std::move(meta));
  };
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || s1_tiles.size() < 2) {
    for (std::size_t i = 0; i < s1_tiles.size(); ++i) run_one(i);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < s1_tiles.size(); i += workers) run_one(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  std::vector<rastercore::Tile> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::vector<rastercore::Tile> infer(const Checkpoint& ckpt, std::span<const rastercore::Tile> s1_tiles, int jobs) {
  return infer(generator_from_checkpoint(ckpt), ckpt.config.sar_range, s1_tiles, jobs);
}

}  // namespace sar2rgb::trainer
