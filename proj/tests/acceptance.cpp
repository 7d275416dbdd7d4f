// Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers as
// arguments to run a subset.
#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

#include "arch_count.hpp"
#include "gradcheck.hpp"
#include "sar2rgb/cli/cli.hpp"
#include "sar2rgb/cli/synth.hpp"
#include "sar2rgb/cloudscreen/cloudscreen.hpp"
#include "sar2rgb/curation/curation.hpp"
#include "sar2rgb/detail/bytes.hpp"
#include "sar2rgb/evalkit/evalkit.hpp"
#include "sar2rgb/rastercore/tile_io.hpp"
#include "sar2rgb/sargen/models.hpp"
#include "sar2rgb/trainer/trainer.hpp"
#include "support.hpp"

using namespace sar2rgb;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

bool operator!=(const evalkit::PredictionSet& a, const evalkit::PredictionSet& b) {
  if (a.size() != b.size()) return true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].pair_id != b[i].pair_id || !(a[i].tile.data().size() == b[i].tile.data().size()) ||
        !std::equal(a[i].tile.data().begin(), a[i].tile.data().end(), b[i].tile.data().begin(),
                    [](float x, float y) { return std::bit_cast<std::uint32_t>(x) == std::bit_cast<std::uint32_t>(y); })) {
      return true;
    }
  }
  return false;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1. metrics against a scalar float64 loop
Outcome metric_oracle() {
  const auto t0 = Clock::now();
  SplitMix64 rng(101);
  double worst_mae = 0.0, worst_psnr = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto a = testsupport::random_rgb(rng, 8, 8);
    const auto b = testsupport::random_rgb(rng, 8, 8);
    worst_mae = std::max(worst_mae, std::fabs(evalkit::mae(a, b) - testsupport::oracle_mae(a.data(), b.data())));
    worst_psnr = std::max(worst_psnr, std::fabs(evalkit::psnr(a, b) - testsupport::oracle_psnr(a.data(), b.data())));
  }
  const double secs = seconds_since(t0);
  return {worst_mae < 1e-9 && worst_psnr < 1e-6 && secs < 5.0,
          fmt("max |dMAE| %.3g (tol 1e-9), max |dPSNR| %.3g dB (tol 1e-6), %.3f s (limit 5)", worst_mae, worst_psnr,
              secs)};
}

// 2. analytic PSNR points
Outcome psnr_points() {
  const auto zero = testsupport::constant_rgb(0.0f, 8, 8);
  const auto half = testsupport::constant_rgb(0.5f, 8, 8);
  const double offset = evalkit::psnr(half, zero);
  SplitMix64 rng(102);
  const auto r = testsupport::random_rgb(rng, 8, 8);
  const double same = evalkit::psnr(r, r);
  const double expect = 20.0 * std::log10(2.0);
  return {std::fabs(offset - expect) < 1e-3 && same == 99.0,
          fmt("offset 0.5 -> %.6f dB (want %.4f +- 1e-3), identical -> %.1f dB (want 99.0 exactly)", offset, expect,
              same)};
}

// 3. QA60 decode depends on bits 10 and 11 only
Outcome qa60_bits() {
  SplitMix64 rng(103);
  std::size_t mismatches = 0, cases = 0;
  for (std::uint32_t cloud : {0u, 1u << 10, 1u << 11, (1u << 10) | (1u << 11)}) {
    for (int k = 0; k < 100; ++k) {
      std::vector<float> v(16);
      for (auto& x : v) {
        const auto other = static_cast<std::uint32_t>(rng.next()) & 0xFFFFu & ~cloudscreen::kQa60CloudBits;
        x = static_cast<float>(other | cloud);
      }
      const rastercore::Tile qa({rastercore::BandRole::QA60}, 4, 4,
                                {"qa", "", rastercore::Sensor::QA60, 0.0f}, std::move(v));
      const auto mask = cloudscreen::decode_qa60(qa);
      for (auto f : mask.flags) mismatches += (f != 0) != (cloud != 0);
      ++cases;
    }
  }
  return {mismatches == 0, fmt("%zu bit patterns, %zu pixels disagree with bits 10/11", cases, mismatches)};
}

std::set<std::string> ids_of(const std::vector<curation::PairRecord>& v) {
  std::set<std::string> s;
  for (const auto& p : v) s.insert(p.pair_id);
  return s;
}

int cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) std::fprintf(stderr, "%s", err.str().c_str());
  return code;
}

// 4. synth -> screen -> filter through the command line
Outcome screening() {
  const auto dir = testsupport::scratch("acceptance_screening");
  const auto d = [&](const char* p) { return (dir / p).string(); };
  bool ok = cli({"synth", "--out", d("fx"), "--n-pairs", "50", "--cloud-fraction", "0.4", "--seed", "7"}) == 0;
  ok = ok && cli({"screen", "--in", d("fx"), "--out", d("screen.jsonl")}) == 0;
  ok = ok && cli({"filter", "--screen", d("screen.jsonl"), "--preset", "dataset2", "--out", d("d2.jsonl")}) == 0;
  ok = ok && cli({"filter", "--screen", d("screen.jsonl"), "--preset", "dataset1", "--out", d("d1.jsonl")}) == 0;
  if (!ok) return {false, "command failed"};

  const auto truth = nlohmann::json::parse(detail::read_file(dir / "fx" / "truth.json"));
  const auto all = ids_of(curation::read_manifest(dir / "fx" / "manifest.jsonl"));
  std::set<std::string> clean = all, unflagged = all;
  for (const auto& id : truth.at("cloudy")) clean.erase(id.get<std::string>());
  for (const auto& id : truth.at("nodata")) clean.erase(id.get<std::string>()), unflagged.erase(id.get<std::string>());
  for (const auto& id : truth.at("qa60_flagged")) unflagged.erase(id.get<std::string>());
  const auto d2 = ids_of(curation::read_manifest(dir / "d2.jsonl"));
  const auto d1 = ids_of(curation::read_manifest(dir / "d1.jsonl"));
  return {clean.size() == 30 && d2 == clean && d1 == unflagged,
          fmt("dataset-2 kept %zu (clean %zu, equal %d), dataset-1 kept %zu (QA60 unset %zu, equal %d)", d2.size(),
              clean.size(), int(d2 == clean), d1.size(), unflagged.size(), int(d1 == unflagged))};
}

// 5. SPADE layer finite differences in double
Outcome spade_gradients() {
  sargen::WeightInit init(105, 0.3);
  sargen::SpadeLayerWeights<double> w(2, 8, 4, init);
  SplitMix64 rng(106);
  auto x = testsupport::random_param(rng, {2, 4, 8, 8});
  auto m = testsupport::random_param(rng, {2, 2, 8, 8});
  sargen::ParamList<double> params;
  w.collect(params, "spade");
  std::vector<testsupport::V> leaves{x, m};
  for (const auto& p : params) leaves.push_back(p.var);
  const auto r = testsupport::gradcheck(leaves, [&] {
    SplitMix64 local(107);
    return testsupport::weighted_total(sargen::spade_normalize(x, m, w), local);
  });
  std::ostringstream os;
  os << r.checked << " elements, " << r;
  return {r.max_rel < 1e-4, os.str() + " (tol 1e-4, step 1e-5)"};
}

// 6. generator shapes, range and parameter counts
Outcome generator_contracts() {
  std::size_t bad_shape = 0, out_of_range = 0, bad_count = 0, runs = 0;
  SplitMix64 rng(108);
  for (auto variant : {sargen::Variant::Spade, sargen::Variant::Pix2PixHD}) {
    for (int s : {16, 64, 256}) {
      sargen::GeneratorConfig g;
      g.variant = variant;
      g.image_size = s;
      g.base_width = 4;
      g.spade_hidden = 8;
      g.n_res_blocks = 2;
      g.seed_size = 8;
      g.n_up_blocks = 0;
      while ((g.seed_size << g.n_up_blocks) < s) ++g.n_up_blocks;
      const sargen::Generator<float> gen(g, 109);
      bad_count += gen.parameter_count() != testsupport::expected_parameters(g);
      for (int k = 0; k < 100; ++k) {
        std::vector<float> in(2 * s * s);
        for (auto& v : in) v = static_cast<float>(2.0 * rng.uniform() - 1.0);
        const auto out = sargen::generate(gen, curation::ModelArray{2, s, s, std::move(in)});
        bad_shape += out.channels != 3 || out.height != s || out.width != s || out.data.size() != 3u * s * s;
        for (float v : out.data) out_of_range += !(v >= -1.0f && v <= 1.0f);
        ++runs;
      }
    }
    sargen::GeneratorConfig full;
    full.variant = variant;
    bad_count += sargen::Generator<float>(full, 110).parameter_count() != testsupport::expected_parameters(full);
  }
  return {bad_shape == 0 && out_of_range == 0 && bad_count == 0,
          fmt("%zu forward passes: %zu bad shapes, %zu values outside [-1,1], %zu parameter count mismatches", runs,
              bad_shape, out_of_range, bad_count)};
}

std::vector<trainer::TrainingPair> fixture_pairs(const std::string& name, std::size_t n, int size,
                                                 std::uint64_t seed) {
  const auto dir = testsupport::scratch(name);
  cli::FixtureSpec spec;
  spec.n_pairs = n;
  spec.size = size;
  spec.seed = seed;
  return trainer::load_training_pairs(cli::synth_fixture(spec, dir).pairs);
}

trainer::TrainConfig bench_config(bool gan, std::uint64_t seed) {
  auto c = trainer::TrainConfig::defaults_for(sargen::Variant::Spade);
  c.generator.image_size = 64;
  c.generator.seed_size = 8;
  c.generator.n_up_blocks = 3;
  c.generator.base_width = 8;
  c.generator.spade_hidden = 32;
  c.discriminator = {2, 3, 16};
  c.loss = gan ? sargen::LossConfig{1.0, 1000.0, sargen::GanKind::Hinge} : sargen::LossConfig::l1_only();
  c.batch_size = 4;
  c.seed = seed;
  c.optimizer.learning_rate = 1e-3;
  return c;
}

// 7. supervised overfit on eight pairs
Outcome overfit() {
  const auto t0 = Clock::now();
  auto cfg = bench_config(false, 111);
  cfg.max_steps = 300;
  auto pairs = fixture_pairs("acceptance_overfit", 8, 64, 112);
  trainer::Trainer t(cfg, pairs);
  const auto trace = t.run();
  bool finite = true;
  for (const auto& r : trace.records) finite = finite && std::isfinite(r.generator_total);
  const double mae = t.evaluate(pairs).mae_mean;
  const double secs = seconds_since(t0);
  return {finite && mae < 0.05 && secs < 600.0,
          fmt("%lld steps, batch 4: train MAE %.5f (limit 0.05), %.1f s (limit 600)",
              static_cast<long long>(cfg.max_steps), mae, secs)};
}

// 8. L1-only against GAN + 1000 L1 on a held-out split
Outcome trend() {
  const auto t0 = Clock::now();
  const auto dir = testsupport::scratch("acceptance_trend");
  cli::FixtureSpec spec;
  spec.n_pairs = 250;
  spec.size = 64;
  spec.seed = 113;
  const auto fx = cli::synth_fixture(spec, dir);
  const auto split = curation::split_holdout(fx.pairs, 50, 114);
  const auto train_pairs = trainer::load_training_pairs(split.train);
  const auto eval_pairs = trainer::load_training_pairs(split.eval);

  std::vector<double> l1_runs, gan_runs;
  bool finite = true;
  std::string per_seed;
  for (std::uint64_t seed : {1, 2, 3}) {
    for (bool gan : {false, true}) {
      auto cfg = bench_config(gan, seed);
      cfg.max_steps = 2000;
      trainer::Trainer t(cfg, train_pairs, eval_pairs);
      const auto trace = t.run();
      for (const auto& r : trace.records) {
        finite = finite && std::isfinite(r.generator_total) && std::isfinite(r.l1_term);
        if (r.gan_term) finite = finite && std::isfinite(*r.gan_term);
        if (r.discriminator_loss) finite = finite && std::isfinite(*r.discriminator_loss);
      }
      finite = finite && trace.records.size() == 2000;
      const double mae = t.evaluate(eval_pairs).mae_mean;
      (gan ? gan_runs : l1_runs).push_back(mae);
      per_seed += fmt(" %s/seed%llu=%.5f", gan ? "gan" : "l1", static_cast<unsigned long long>(seed), mae);
      std::fprintf(stderr, "trend: %s seed %llu eval MAE %.5f (%.0f s elapsed)\n", gan ? "GAN+1000L1" : "L1",
                   static_cast<unsigned long long>(seed), mae, seconds_since(t0));
    }
  }
  std::sort(l1_runs.begin(), l1_runs.end());
  std::sort(gan_runs.begin(), gan_runs.end());
  const double secs = seconds_since(t0);
  return {finite && l1_runs[1] <= gan_runs[1] && secs < 7200.0,
          fmt("median eval MAE L1 %.5f vs GAN+1000L1 %.5f, losses finite %d, %.0f s (limit 7200);", l1_runs[1],
              gan_runs[1], int(finite), secs) +
              per_seed};
}

// 9. identical runs and resumed runs
Outcome determinism() {
  auto pairs = fixture_pairs("acceptance_determinism", 6, 16, 115);
  const auto dir = testsupport::scratch("acceptance_resume");
  std::size_t differing = 0;
  double resume_rel = 0.0;
  bool ckpt_equal = true;
  for (bool gan : {false, true}) {
    auto cfg = bench_config(gan, 116);
    cfg.generator.image_size = 16;
    cfg.generator.seed_size = 4;
    cfg.generator.n_up_blocks = 2;
    cfg.generator.base_width = 4;
    cfg.generator.spade_hidden = 8;
    cfg.discriminator = {2, 2, 4};
    cfg.batch_size = 4;  // 6 pairs, so batches cross epochs
    cfg.max_steps = 12;
    cfg.eval_every = 4;
    const auto a = trainer::train(cfg, pairs, pairs);
    const auto b = trainer::train(cfg, pairs, pairs);
    differing += a.second.records != b.second.records;
    differing += !(a.first == b.first);

    trainer::Trainer first(cfg, pairs, pairs);
    auto trace = first.run_until(5);
    const auto path = dir / (gan ? "gan.s2ck" : "l1.s2ck");
    trainer::save_checkpoint(first.checkpoint(), path);
    trainer::Trainer second(trainer::load_checkpoint(path), pairs, pairs);
    trace.append(second.run());
    ckpt_equal = ckpt_equal && second.checkpoint() == a.first;
    if (trace.records.size() != a.second.records.size()) return {false, "resumed trace has the wrong length"};
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
      const auto& x = trace.records[i];
      const auto& y = a.second.records[i];
      auto rel = [](double p, double q) { return std::fabs(p - q) / std::max(std::fabs(q), 1e-12); };
      resume_rel = std::max({resume_rel, rel(x.generator_total, y.generator_total), rel(x.l1_term, y.l1_term)});
      if (x.gan_term) resume_rel = std::max(resume_rel, rel(*x.gan_term, *y.gan_term));
      if (x.discriminator_loss) resume_rel = std::max(resume_rel, rel(*x.discriminator_loss, *y.discriminator_loss));
      if (x.eval_mae) resume_rel = std::max(resume_rel, rel(*x.eval_mae, *y.eval_mae));
    }
  }
  return {differing == 0 && resume_rel <= 1e-6 && ckpt_equal,
          fmt("repeat runs differing: %zu (bit-exact required), resume max relative deviation %.3g (tol 1e-6), "
              "final checkpoints equal %d",
              differing, resume_rel, int(ckpt_equal))};
}

// 10. tile, checkpoint and submission round trips
Outcome round_trips() {
  const auto dir = testsupport::scratch("acceptance_roundtrip");
  SplitMix64 rng(117);
  fs::create_directories(dir / "tiles");
  std::size_t tile_fail = 0;
  for (int i = 0; i < 1000; ++i) {
    const int h = 1 + static_cast<int>(rng.below(24)), w = 1 + static_cast<int>(rng.below(24));
    const int kind = static_cast<int>(rng.below(3));
    std::vector<rastercore::BandRole> roles =
        kind == 0 ? rastercore::sar_roles()
                  : kind == 1 ? rastercore::rgb_roles() : std::vector{rastercore::BandRole::QA60};
    std::vector<float> v(roles.size() * h * w);
    for (auto& x : v) {
      x = kind == 2 ? static_cast<float>(rng.below(65536))
                    : std::bit_cast<float>(static_cast<std::uint32_t>(rng.next()) & 0xBFFFFFFFu);  // finite
    }
    const rastercore::Tile t(roles, h, w,
                             {"rt_" + std::to_string(i), i % 2 ? "2021-03-04" : "",
                              static_cast<rastercore::Sensor>(kind), kind == 0 ? -9999.0f : 0.0f},
                             std::move(v));
    const auto path = dir / "tiles" / ("rt_" + std::to_string(i) + ".s2tl");
    rastercore::write_tile(t, path);
    tile_fail += !(rastercore::read_tile(path) == t);
  }

  auto pairs = fixture_pairs("acceptance_roundtrip_fx", 6, 16, 118);
  auto cfg = bench_config(true, 119);
  cfg.generator.image_size = 16;
  cfg.generator.seed_size = 4;
  cfg.generator.n_up_blocks = 2;
  cfg.generator.base_width = 4;
  cfg.generator.spade_hidden = 8;
  cfg.discriminator = {2, 2, 4};
  cfg.max_steps = 4;
  const auto [ckpt, trace] = trainer::train(cfg, pairs);
  std::vector<rastercore::Tile> s1;
  const auto fx_dir = fs::temp_directory_path() / "sar2rgb_tests" / "acceptance_roundtrip_fx" / "s1";
  for (int i = 0; i < 6; ++i) s1.push_back(rastercore::read_tile(fx_dir / fmt("tile_%04d.s2tl", i)));
  const auto before = trainer::infer(ckpt, s1, 2);
  trainer::save_checkpoint(ckpt, dir / "model.s2ck");
  const auto loaded = trainer::load_checkpoint(dir / "model.s2ck");
  const auto after = trainer::infer(loaded, s1, 1);
  const bool infer_same = before == after && loaded == ckpt;

  evalkit::PredictionSet preds;
  for (const auto& t : after) preds.push_back({t.meta().tile_id, t});
  const auto one = evalkit::package_submission(preds, dir / "sub1");
  const auto two = evalkit::package_submission(preds, dir / "sub2");
  bool files_same = true;
  for (const auto& e : fs::directory_iterator(dir / "sub1")) {
    files_same = files_same && fs::exists(dir / "sub2" / e.path().filename()) &&
                 detail::read_file(e.path()) == detail::read_file(dir / "sub2" / e.path().filename());
  }
  std::vector<std::uint8_t> concat;
  std::vector<std::string> names;
  for (const auto& p : preds) names.push_back(p.pair_id);
  std::sort(names.begin(), names.end());
  for (const auto& n : names) {
    const auto b = detail::read_file(dir / "sub1" / (n + ".s2tl"));
    concat.insert(concat.end(), b.begin(), b.end());
  }
  const bool crc_ok = one.crc32 == two.crc32 && one.crc32 == testsupport::oracle_crc32(concat) && one.count == 6;
  return {tile_fail == 0 && infer_same && files_same && crc_ok,
          fmt("tiles: %zu/1000 failed; checkpoint infer bit-exact %d; package rerun identical %d, crc32 %08x "
              "matches oracle %d",
              tile_fail, int(infer_same), int(files_same), one.crc32, int(crc_ok))};
}

// 11. ensemble identities
Outcome ensemble_algebra() {
  SplitMix64 rng(120);
  auto member = [&] {
    evalkit::PredictionSet s;
    for (const char* id : {"a", "b", "c", "d"}) s.push_back({id, testsupport::random_rgb(rng, 8, 8, id)});
    return s;
  };
  const auto p = member(), q = member(), r = member();
  using evalkit::EnsembleMode;
  using evalkit::EnsembleSpec;
  int failures = 0;
  failures += evalkit::ensemble({{"x", p}, {"y", p}, {"z", p}}, EnsembleSpec{{"x", "y", "z"}, EnsembleMode::Mean, {}}) !=
              p;
  failures += evalkit::ensemble({{"x", p}}, EnsembleSpec{{"x"}, EnsembleMode::Mean, {}}) != p;
  std::map<std::string, std::string> assign{{"a", "x"}, {"b", "x"}, {"c", "x"}, {"d", "x"}};
  failures += evalkit::ensemble({{"x", p}}, EnsembleSpec{{"x"}, EnsembleMode::Assign, assign}) != p;
  std::vector<std::string> order{"p", "q", "r"};
  const std::map<std::string, evalkit::PredictionSet> outs{{"p", p}, {"q", q}, {"r", r}};
  const auto ref = evalkit::ensemble(outs, EnsembleSpec{order, EnsembleMode::Mean, {}});
  int perms = 0;
  do {
    failures += evalkit::ensemble(outs, EnsembleSpec{order, EnsembleMode::Mean, {}}) != ref;
    ++perms;
  } while (std::next_permutation(order.begin(), order.end()));
  failures += evalkit::mae(evalkit::ensemble({{"x", p}, {"y", p}}, EnsembleSpec{{"x", "y"}, EnsembleMode::Mean, {}})[0].tile,
                           q[0].tile) != evalkit::mae(p[0].tile, q[0].tile);
  return {failures == 0, fmt("%d identity or order checks failed (%d member orders tried)", failures, perms)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, metric_oracle}, {2, psnr_points},        {3, qa60_bits},   {4, screening},
      {5, spade_gradients}, {6, generator_contracts}, {7, overfit},     {8, trend},
      {9, determinism},    {10, round_trips},        {11, ensemble_algebra},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& [n, fn] : criteria) {
    if (!only.empty() && !only.count(n)) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %d %s: %s\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
