#include "sar2rgb/cli/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <thread>

#include <CLI11.hpp>

#include "sar2rgb/cli/pipeline_config.hpp"
#include "sar2rgb/cli/synth.hpp"
#include "sar2rgb/detail/bytes.hpp"
#include "sar2rgb/error.hpp"
#include "sar2rgb/evalkit/evalkit.hpp"
#include "sar2rgb/rastercore/external.hpp"
#include "sar2rgb/rastercore/tile_io.hpp"
#include "sar2rgb/trainer/trainer.hpp"

namespace sar2rgb::cli {

namespace fs = std::filesystem;
using rastercore::Tile;

namespace {

// Flags shared by every subcommand; which ones a subcommand exposes varies.
struct Common {
  std::string config;
  std::string in;
  std::string out;
  std::string preset;
  std::uint64_t seed = 0;
  int jobs = 1;
  bool deterministic = false;
  CLI::Option* in_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* preset_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* jobs_opt = nullptr;
  CLI::Option* det_opt = nullptr;
  PipelineConfig cfg;

  void load() {
    if (!config.empty()) cfg = load_pipeline_config(config);
  }

  fs::path in_path(const char* what) const {
    if (in_opt && in_opt->count()) return in;
    if (cfg.in) return *cfg.in;
    throw InvalidArgument(std::string("missing --in (") + what + ")");
  }
  fs::path out_path(const char* what) const {
    if (out_opt && out_opt->count()) return out;
    if (cfg.out) return *cfg.out;
    throw InvalidArgument(std::string("missing --out (") + what + ")");
  }
  std::uint64_t seed_value() const {
    if (seed_opt && seed_opt->count()) return seed;
    if (cfg.seed) return *cfg.seed;
    if (const char* env = std::getenv("SAR2RGB_SEED")) {
      try {
        std::size_t used = 0;
        const auto v = std::stoull(env, &used);
        if (used == std::string(env).size()) return v;
      } catch (const std::exception&) {
      }
      throw InvalidArgument(std::string("SAR2RGB_SEED is not an unsigned integer: '") + env + "'");
    }
    return 0;
  }
  int jobs_value() const {
    const int j = (jobs_opt && jobs_opt->count()) ? jobs : cfg.jobs.value_or(1);
    if (j < 1) throw InvalidArgument("--jobs must be at least 1");
    return j;
  }
  std::optional<std::string> preset_value() const {
    if (preset_opt && preset_opt->count()) return preset;
    return cfg.preset;
  }
  bool deterministic_value() const {
    if (det_opt && det_opt->count()) return deterministic;
    return cfg.deterministic.value_or(true);
  }
};

enum Flags : unsigned { kIn = 1, kOut = 2, kPreset = 4, kSeed = 8, kJobs = 16, kDet = 32 };

void add_common(CLI::App* app, Common& c, unsigned flags) {
  app->add_option("--config", c.config, "pipeline config JSON; flags override its values")->check(CLI::ExistingFile);
  if (flags & kIn) c.in_opt = app->add_option("--in", c.in, "input path");
  if (flags & kOut) c.out_opt = app->add_option("--out", c.out, "output path");
  if (flags & kPreset) c.preset_opt = app->add_option("--preset", c.preset, "filter preset: dataset1 or dataset2");
  if (flags & kSeed) c.seed_opt = app->add_option("--seed", c.seed, "seed (default: config, then $SAR2RGB_SEED, then 0)");
  if (flags & kJobs) c.jobs_opt = app->add_option("--jobs", c.jobs, "worker threads");
  if (flags & kDet) c.det_opt = app->add_flag("--deterministic,!--no-deterministic", c.deterministic,
                                              "require bit-reproducible kernels (default on)");
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, jobs)), std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
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

std::vector<fs::path> list_tiles(const fs::path& dir) {
  std::vector<fs::path> files;
  if (!fs::is_directory(dir)) return files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".s2tl") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<curation::TileRecord> scan(const fs::path& dir) {
  std::vector<curation::TileRecord> out;
  for (const auto& f : list_tiles(dir)) out.push_back({rastercore::read_tile(f).meta(), f});
  return out;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

// ---- subcommands ----

struct IngestCmd {
  Common c;
  std::vector<std::string> bands;
  std::string tile_id, date;
  CLI::App* app = nullptr;

  void attach(CLI::App& root) {
    app = root.add_subcommand("ingest", "convert a TIFF/GeoTIFF raster into a tile file");
    add_common(app, c, kIn | kOut);
    app->add_option("--bands", bands, "band roles in source order, e.g. VV,VH or RED,GREEN,BLUE")
        ->delimiter(',')
        ->required();
    app->add_option("--tile-id", tile_id, "tile id (default: file stem)");
    app->add_option("--date", date, "acquisition date YYYY-MM-DD");
  }

  int exec(std::ostream&, std::ostream& err) {
    c.load();
    std::vector<rastercore::BandRole> roles;
    for (const auto& b : bands) roles.push_back(rastercore::parse_band_role(b));
    auto tile = rastercore::ingest_external(c.in_path("source raster"), roles);
    auto meta = tile.meta();
    if (!tile_id.empty()) meta.tile_id = tile_id;
    if (!date.empty()) {
      curation::parse_iso_date(date);
      meta.acquired_date = date;
    }
    tile = tile.with_meta(meta);
    const auto out = c.out_path("tile file");
    ensure_parent(out);
    rastercore::write_tile(tile, out);
    err << "ingest: " << tile.bands() << " band(s) " << tile.height() << "x" << tile.width() << " -> " << out.string()
        << "\n";
    return kExitOk;
  }
};

struct ScreenCmd {
  Common c;
  std::string match_key;
  int max_day_gap = 0;
  float score = 0.0f, brightness = 0.0f;
  CLI::Option *match_opt = nullptr, *gap_opt = nullptr, *score_opt = nullptr, *bright_opt = nullptr;
  CLI::App* app = nullptr;

  void attach(CLI::App& root) {
    app = root.add_subcommand("screen", "pair s1/ s2/ qa60/ tiles and compute nodata and cloud ratios");
    add_common(app, c, kIn | kOut | kJobs);
    match_opt = app->add_option("--match-key", match_key, "tile_id or tile_id_and_date");
    gap_opt = app->add_option("--max-day-gap", max_day_gap, "largest S1/S2 date gap for tile_id_and_date");
    score_opt = app->add_option("--score-threshold", score, "brightness minus saturation threshold");
    bright_opt = app->add_option("--brightness-threshold", brightness, "minimum brightness of a cloudy pixel");
  }

  int exec(std::ostream&, std::ostream& err) {
    c.load();
    auto policy = c.cfg.pair_policy;
    if (match_opt->count()) policy.match_key = parse_match_key(match_key);
    if (gap_opt->count()) policy.max_day_gap = max_day_gap;
    policy.validate();
    auto params = c.cfg.heuristic;
    if (score_opt->count()) params.score_threshold = score;
    if (bright_opt->count()) params.brightness_threshold = brightness;
    params.validate();

    const auto root = c.in_path("tile directory");
    if (!fs::is_directory(root / "s2")) throw IoError("no s2/ directory under '" + root.string() + "'");
    const auto s1 = scan(root / "s1");
    const auto s2 = scan(root / "s2");
    const auto qa = scan(root / "qa60");
    auto result = curation::pair_manifests(s1, s2, policy, qa);
    parallel_for(result.pairs.size(), c.jobs_value(), [&](std::size_t i) {
      auto& p = result.pairs[i];
      const auto rgb = curation::normalize_s2_reflectance(rastercore::read_tile(p.s2_path));
      std::optional<Tile> qa_tile;
      if (p.qa60_path) qa_tile = rastercore::read_tile(*p.qa60_path);
      p.screen = cloudscreen::screen_tile(rgb, qa_tile ? &*qa_tile : nullptr, params);
    });
    const auto out = c.out_path("screen manifest");
    ensure_parent(out);
    curation::write_manifest(result.pairs, out);
    err << "screen: " << result.pairs.size() << " pair(s), " << result.unmatched_s2 << " unmatched optical, "
        << result.unmatched_s1 << " unmatched radar -> " << out.string() << "\n";
    return kExitOk;
  }
};

struct FilterCmd {
  Common c;
  std::string screen;
  double max_nodata = 0.0, max_qa60 = 0.0, max_heuristic = 0.0;
  CLI::Option *screen_opt = nullptr, *nodata_opt = nullptr, *qa_opt = nullptr, *heur_opt = nullptr;
  CLI::App* app = nullptr;

  void attach(CLI::App& root) {
    app = root.add_subcommand("filter", "keep screened pairs that pass the ratio thresholds");
    add_common(app, c, kIn | kOut | kPreset);
    screen_opt = app->add_option("--screen", screen, "screen manifest (same as --in)");
    nodata_opt = app->add_option("--max-nodata", max_nodata, "largest nodata ratio kept");
    qa_opt = app->add_option("--max-qa60", max_qa60, "largest QA60 cloud ratio kept");
    heur_opt = app->add_option("--max-heuristic", max_heuristic, "largest heuristic cloud ratio kept");
  }

  int exec(std::ostream&, std::ostream& err) {
    c.load();
    const auto preset = c.preset_value();
    auto spec = preset ? curation::FilterSpec::preset(*preset) : curation::FilterSpec::dataset2();
    if (nodata_opt->count()) spec.max_nodata_ratio = max_nodata;
    if (qa_opt->count()) spec.max_qa60_cloud_ratio = max_qa60;
    if (heur_opt->count()) spec.max_heuristic_cloud_ratio = max_heuristic;
    spec.validate();
    const fs::path in = screen_opt->count() ? fs::path(screen) : c.in_path("screen manifest");
    const auto pairs = curation::read_manifest(in);
    const auto kept = curation::filter_dataset(pairs, spec);
    const auto out = c.out_path("filtered manifest");
    ensure_parent(out);
    curation::write_manifest(kept, out);
    err << "filter: kept " << kept.size() << " of " << pairs.size() << " -> " << out.string() << "\n";
    return kExitOk;
  }
};

struct SplitCmd {
  Common c;
  std::size_t n_eval = 0;
  CLI::App* app = nullptr;

  void attach(CLI::App& root) {
    app = root.add_subcommand("split", "hold out a seeded evaluation subset; writes train.jsonl and eval.jsonl");
    add_common(app, c, kIn | kOut | kSeed);
    app->add_option("--n", n_eval, "number of evaluation pairs")->required();
  }

  int exec(std::ostream&, std::ostream& err) {
    c.load();
    const auto pairs = curation::read_manifest(c.in_path("manifest"));
    const auto split = curation::split_holdout(pairs, n_eval, c.seed_value());
    const auto out = c.out_path("output directory");
    fs::create_directories(out);
    curation::write_manifest(split.train, out / "train.jsonl");
    curation::write_manifest(split.eval, out / "eval.jsonl");
    err << "split: " << split.train.size() << " train, " << split.eval.size() << " eval -> " << out.string() << "\n";
    return kExitOk;
  }
};

struct TrainCmd {
  Common c;
  std::string eval_manifest, trace, resume, variant, gan_kind;
  std::int64_t steps = 0, eval_every = 0;
  int batch = 0, image_size = 0, base_width = 0, n_up = 0, seed_size = 0, n_res = 0, spade_hidden = 0, d_scales = 0, d_layers = 0, d_width = 0;
  double lr = 0.0, gan_weight = 0.0, l1_weight = 0.0;
  CLI::Option *variant_opt, *kind_opt, *steps_opt, *eval_every_opt, *batch_opt, *size_opt, *width_opt, *n_up_opt,
      *seed_size_opt, *n_res_opt, *hidden_opt, *d_scales_opt, *d_layers_opt, *d_width_opt, *lr_opt, *gan_opt, *l1_opt;
  CLI::App* app = nullptr;

  void attach(CLI::App& root) {
    app = root.add_subcommand("train", "train a generator on a pair manifest and write a checkpoint");
    add_common(app, c, kIn | kOut | kSeed | kDet);
    app->add_option("--eval", eval_manifest, "evaluation manifest for periodic metrics");
    app->add_option("--trace", trace, "loss trace JSONL (default: <out>.trace.jsonl)");
    app->add_option("--resume", resume, "continue from this checkpoint")->check(CLI::ExistingFile);
    variant_opt = app->add_option("--variant", variant, "spade or pix2pixhd");
    kind_opt = app->add_option("--gan-kind", gan_kind, "hinge or lsgan");
    steps_opt = app->add_option("--steps", steps, "total optimizer steps");
    eval_every_opt = app->add_option("--eval-every", eval_every, "evaluate every N steps (0 = never)");
    batch_opt = app->add_option("--batch-size", batch, "pairs per step");
    size_opt = app->add_option("--image-size", image_size, "tile size S");
    width_opt = app->add_option("--base-width", base_width, "generator base channel width");
    n_up_opt = app->add_option("--n-up", n_up, "SPADE upsampling stages");
    seed_size_opt = app->add_option("--seed-size", seed_size, "SPADE starting resolution");
    n_res_opt = app->add_option("--n-res", n_res, "pix2pixHD residual blocks");
    hidden_opt = app->add_option("--spade-hidden", spade_hidden, "SPADE modulation hidden width");
    d_scales_opt = app->add_option("--d-scales", d_scales, "discriminator scales");
    d_layers_opt = app->add_option("--d-layers", d_layers, "discriminator stride-2 layers per scale");
    d_width_opt = app->add_option("--d-base-width", d_width, "discriminator base channel width");
    lr_opt = app->add_option("--lr", lr, "Adam learning rate");
    gan_opt = app->add_option("--gan-weight", gan_weight, "adversarial term weight (0 or 1)");
    l1_opt = app->add_option("--l1-weight", l1_weight, "L1 term weight");
  }

  trainer::TrainConfig build_config() const {
    trainer::TrainConfig cfg;
    if (c.cfg.train) {
      cfg = *c.cfg.train;
      if (variant_opt->count()) cfg.generator.variant = sargen::parse_variant(variant);
    } else {
      cfg = trainer::TrainConfig::defaults_for(variant_opt->count() ? sargen::parse_variant(variant)
                                                                   : sargen::Variant::Spade);
    }
    if (kind_opt->count()) cfg.loss.gan_kind = sargen::parse_gan_kind(gan_kind);
    if (steps_opt->count()) cfg.max_steps = steps;
    if (eval_every_opt->count()) cfg.eval_every = eval_every;
    if (batch_opt->count()) cfg.batch_size = batch;
    if (size_opt->count()) cfg.generator.image_size = image_size;
    if (width_opt->count()) cfg.generator.base_width = base_width;
    if (n_up_opt->count()) cfg.generator.n_up_blocks = n_up;
    if (seed_size_opt->count()) cfg.generator.seed_size = seed_size;
    if (n_res_opt->count()) cfg.generator.n_res_blocks = n_res;
    if (hidden_opt->count()) cfg.generator.spade_hidden = spade_hidden;
    if (d_scales_opt->count()) cfg.discriminator.n_scales = d_scales;
    if (d_layers_opt->count()) cfg.discriminator.n_layers = d_layers;
    if (d_width_opt->count()) cfg.discriminator.base_width = d_width;
    if (lr_opt->count()) cfg.optimizer.learning_rate = lr;
    if (gan_opt->count()) cfg.loss.gan_weight = gan_weight;
    if (l1_opt->count()) cfg.loss.l1_weight = l1_weight;
    if (c.seed_opt->count() || c.cfg.seed || !c.cfg.train) cfg.seed = c.seed_value();
    cfg.deterministic = c.deterministic_value();
    cfg.validate();
    return cfg;
  }

  int exec(std::ostream&, std::ostream& err) {
    c.load();
    const auto out = c.out_path("checkpoint file");
    const fs::path trace_path = trace.empty() ? fs::path(out.string() + ".trace.jsonl") : fs::path(trace);

    std::optional<trainer::Checkpoint> start;
    trainer::TrainConfig cfg;
    if (!resume.empty()) {
      start = trainer::load_checkpoint(resume);
      if (steps_opt->count()) start->config.max_steps = steps;
      cfg = start->config;
    } else {
      cfg = build_config();
    }
    auto train_pairs = trainer::load_training_pairs(curation::read_manifest(c.in_path("train manifest")),
                                                    cfg.sar_range);
    std::vector<trainer::TrainingPair> eval_pairs;
    if (!eval_manifest.empty()) {
      eval_pairs = trainer::load_training_pairs(curation::read_manifest(eval_manifest), cfg.sar_range);
    }
    err << "train: " << train_pairs.size() << " pair(s), " << sargen::to_string(cfg.generator.variant) << ", "
        << cfg.max_steps << " step(s)\n";

    auto t = start ? trainer::Trainer(*start, std::move(train_pairs), std::move(eval_pairs))
                   : trainer::Trainer(cfg, std::move(train_pairs), std::move(eval_pairs));
    trainer::LossTrace log;
    if (start && fs::exists(trace_path)) {
      for (const auto& r : trainer::LossTrace::from_jsonl(
               [&] {
                 const auto b = detail::read_file(trace_path);
                 return std::string(b.begin(), b.end());
               }())
               .records) {
        if (r.step <= t.step()) log.records.push_back(r);
      }
    }
    log.append(t.run_until(cfg.max_steps));
    ensure_parent(out);
    trainer::save_checkpoint(t.checkpoint(), out);
    ensure_parent(trace_path);
    detail::write_text(trace_path, log.to_jsonl());
    if (!log.records.empty()) {
      const auto& last = log.records.back();
      err << "train: step " << last.step << " generator loss " << last.generator_total << " -> " << out.string()
          << "\n";
    }
    return kExitOk;
  }
};

struct InferCmd {
  Common c;
  std::string checkpoint;
  bool png = false;
  CLI::App* app = nullptr;

  void attach(CLI::App& root) {
    app = root.add_subcommand("infer", "translate S1 tiles (a directory or a pair manifest) to RGB tiles");
    add_common(app, c, kIn | kOut | kJobs);
    app->add_option("--checkpoint", checkpoint, "trained checkpoint")->required()->check(CLI::ExistingFile);
    app->add_flag("--png", png, "also write <id>.png previews");
  }

  int exec(std::ostream&, std::ostream& err) {
    c.load();
    const auto in = c.in_path("S1 directory or manifest");
    std::vector<std::string> ids;
    std::vector<Tile> tiles;
    if (fs::is_directory(in)) {
      for (const auto& f : list_tiles(in)) {
        ids.push_back(f.stem().string());
        tiles.push_back(rastercore::read_tile(f));
      }
    } else {
      for (const auto& p : curation::read_manifest(in)) {
        ids.push_back(p.pair_id);
        tiles.push_back(rastercore::read_tile(p.s1_path));
      }
    }
    const auto ckpt = trainer::load_checkpoint(checkpoint);
    const auto preds = trainer::infer(ckpt, tiles, c.jobs_value());
    const auto out = c.out_path("prediction directory");
    fs::create_directories(out);
    for (std::size_t i = 0; i < preds.size(); ++i) {
      rastercore::write_tile(preds[i], out / (ids[i] + ".s2tl"));
      if (png) rastercore::export_png(preds[i], out / (ids[i] + ".png"));
    }
    err << "infer: " << preds.size() << " tile(s) -> " << out.string() << "\n";
    return kExitOk;
  }
};

struct EvalCmd {
  Common c;
  std::string ref;
  CLI::App* app = nullptr;

  void attach(CLI::App& root) {
    app = root.add_subcommand("eval", "score a prediction directory against a pair manifest (MAE, PSNR)");
    add_common(app, c, kIn | kOut);
    app->add_option("--ref", ref, "manifest whose S2 tiles are the references")->required();
  }

  int exec(std::ostream& out, std::ostream& err) {
    c.load();
    const auto preds = evalkit::load_prediction_dir(c.in_path("prediction directory"));
    evalkit::PredictionSet refs;
    for (const auto& p : curation::read_manifest(ref)) {
      refs.push_back({p.pair_id, curation::normalize_s2_reflectance(rastercore::read_tile(p.s2_path))});
    }
    const auto report = evalkit::evaluate(preds, refs);
    const auto text = nlohmann::json(report).dump(2) + "\n";
    if ((c.out_opt && c.out_opt->count()) || c.cfg.out) {
      const auto path = c.out_path("metrics file");
      ensure_parent(path);
      detail::write_text(path, text);
    }
    out << text;
    err << "eval: " << report.n_images << " image(s), MAE " << report.mae_mean << ", PSNR " << report.psnr_mean_db
        << " dB\n";
    return kExitOk;
  }
};

struct EnsembleCmd {
  Common c;
  std::vector<std::string> members;
  std::string mode, assignment;
  CLI::Option *members_opt = nullptr, *mode_opt = nullptr;
  CLI::App* app = nullptr;

  void attach(CLI::App& root) {
    app = root.add_subcommand("ensemble", "combine member prediction directories (<in>/<member>/) into one set");
    add_common(app, c, kIn | kOut);
    members_opt = app->add_option("--members", members, "member names (default: config, then all subdirectories)")
                      ->delimiter(',');
    mode_opt = app->add_option("--mode", mode, "mean or assign");
    app->add_option("--assignment", assignment, "JSON object pair_id -> member (assign mode)")
        ->check(CLI::ExistingFile);
  }

  int exec(std::ostream&, std::ostream& err) {
    c.load();
    evalkit::EnsembleSpec spec = c.cfg.ensemble.value_or(evalkit::EnsembleSpec{});
    const auto root = c.in_path("member root directory");
    if (members_opt->count()) spec.members = members;
    if (spec.members.empty()) {
      for (const auto& e : fs::directory_iterator(root)) {
        if (e.is_directory()) spec.members.push_back(e.path().filename().string());
      }
      std::sort(spec.members.begin(), spec.members.end());
    }
    if (mode_opt->count()) spec.mode = evalkit::parse_ensemble_mode(mode);
    if (!assignment.empty()) {
      const auto b = detail::read_file(assignment);
      spec.assignment = nlohmann::json::parse(b.begin(), b.end()).get<std::map<std::string, std::string>>();
    }
    std::map<std::string, evalkit::PredictionSet> outputs;
    for (const auto& m : spec.members) outputs[m] = evalkit::load_prediction_dir(root / m);
    const auto combined = evalkit::ensemble(outputs, spec);
    const auto out = c.out_path("output directory");
    fs::create_directories(out);
    for (const auto& p : combined) rastercore::write_tile(p.tile, out / (p.pair_id + ".s2tl"));
    err << "ensemble: " << combined.size() << " tile(s) from " << spec.members.size() << " member(s) -> "
        << out.string() << "\n";
    return kExitOk;
  }
};

struct PackageCmd {
  Common c;
  CLI::App* app = nullptr;

  void attach(CLI::App& root) {
    app = root.add_subcommand("package", "write the submission bundle with per-tile and overall checksums");
    add_common(app, c, kIn | kOut);
  }

  int exec(std::ostream& out, std::ostream& err) {
    c.load();
    const auto preds = evalkit::load_prediction_dir(c.in_path("prediction directory"));
    const auto dir = c.out_path("submission directory");
    const auto summary = evalkit::package_submission(preds, dir);
    char crc[16];
    std::snprintf(crc, sizeof crc, "%08x", summary.crc32);
    out << nlohmann::json{{"count", summary.count}, {"crc32", crc}}.dump() << "\n";
    err << "package: " << summary.count << " tile(s) -> " << dir.string() << "\n";
    return kExitOk;
  }
};

struct SynthCmd {
  Common c;
  FixtureSpec spec;
  CLI::App* app = nullptr;

  void attach(CLI::App& root) {
    app = root.add_subcommand("synth", "generate a synthetic paired S1/S2/QA60 corpus");
    add_common(app, c, kOut | kSeed);
    app->add_option("--n-pairs", spec.n_pairs, "number of pairs")->capture_default_str();
    app->add_option("--size", spec.size, "tile size (power of two >= 16)")->capture_default_str();
    app->add_option("--cloud-fraction", spec.cloud_fraction, "share of optical tiles with a cloud blob")
        ->capture_default_str();
    app->add_option("--qa60-miss-fraction", spec.qa60_miss_fraction,
                    "share of cloudy tiles whose QA60 bits stay clear")
        ->capture_default_str();
    app->add_option("--nodata-fraction", spec.nodata_fraction, "share of optical tiles with a nodata stripe")
        ->capture_default_str();
    app->add_flag("--tiff", spec.write_tiff, "also write TIFF rasters under tiff/");
  }

  int exec(std::ostream&, std::ostream& err) {
    c.load();
    spec.seed = c.seed_value();
    const auto out = c.out_path("corpus directory");
    const auto m = synth_fixture(spec, out);
    err << "synth: " << m.pairs.size() << " pair(s), " << m.cloudy.size() << " cloudy -> " << out.string() << "\n";
    return kExitOk;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"SAR-to-RGB translation toolkit: curation, training, inference and scoring", "sar2rgb"};
  app.require_subcommand(1, 1);
  IngestCmd ingest;
  ScreenCmd screen;
  FilterCmd filter;
  SplitCmd split;
  TrainCmd train;
  InferCmd infer;
  EvalCmd eval;
  EnsembleCmd ens;
  PackageCmd package;
  SynthCmd synth;
  ingest.attach(app);
  screen.attach(app);
  filter.attach(app);
  split.attach(app);
  train.attach(app);
  infer.attach(app);
  eval.attach(app);
  ens.attach(app);
  package.attach(app);
  synth.attach(app);

  if (args.empty()) {
    err << app.help();
    return kExitUsage;
  }
  if (!args.front().starts_with("-") && !app.get_subcommand_no_throw(args.front())) {
    err << "error: unknown subcommand '" << args.front() << "'\n" << app.help();
    return kExitUsage;
  }
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  try {
    if (*ingest.app) return ingest.exec(out, err);
    if (*screen.app) return screen.exec(out, err);
    if (*filter.app) return filter.exec(out, err);
    if (*split.app) return split.exec(out, err);
    if (*train.app) return train.exec(out, err);
    if (*infer.app) return infer.exec(out, err);
    if (*eval.app) return eval.exec(out, err);
    if (*ens.app) return ens.exec(out, err);
    if (*package.app) return package.exec(out, err);
    if (*synth.app) return synth.exec(out, err);
  } catch (const NonFiniteLoss& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace sar2rgb::cli
