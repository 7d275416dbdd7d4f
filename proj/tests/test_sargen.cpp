#include <doctest.h>

#include "arch_count.hpp"
#include "gradcheck.hpp"
#include "sar2rgb/error.hpp"
#include "sar2rgb/sargen/losses.hpp"
#include "sar2rgb/sargen/models.hpp"

using namespace sar2rgb;
using namespace sar2rgb::sargen;
using testsupport::gradcheck;
using testsupport::random_param;
using testsupport::V;

namespace {

void zero_heads(SpadeLayerWeights<double>& w) {
  for (auto* c : {&w.gamma_conv, &w.beta_conv}) {
    for (auto& v : c->weight.mutable_value()) v = 0.0;
    for (auto& v : c->bias.mutable_value()) v = 0.0;
  }
}

std::vector<V> leaves_of(const ParamList<double>& params) {
  std::vector<V> out;
  for (const auto& p : params) out.push_back(p.var);
  return out;
}

GeneratorConfig tiny(Variant v, int size) {
  GeneratorConfig g;
  g.variant = v;
  g.image_size = size;
  g.base_width = 4;
  g.spade_hidden = 4;
  g.n_res_blocks = 1;
  g.seed_size = 4;
  g.n_up_blocks = 0;
  while ((g.seed_size << g.n_up_blocks) < size) ++g.n_up_blocks;
  return g;
}

}  // namespace

TEST_CASE("spade_normalize with zero heads") {
  WeightInit init(1);
  SpadeLayerWeights<double> w(2, 3, 4, init);
  zero_heads(w);
  SplitMix64 rng(2);
  const auto m = random_param(rng, {1, 2, 8, 8});

  SUBCASE("constant channels give zeros") {
    std::vector<double> xs(4 * 64);
    for (int c = 0; c < 4; ++c) std::fill_n(xs.begin() + c * 64, 64, 0.5 * c - 1.0);
    const auto out = spade_normalize(V::constant({1, 4, 8, 8}, xs), m, w);
    for (double v : out.value()) CHECK(v == 0.0);
  }
  SUBCASE("output is the plain normalization, zero mean and unit variance") {
    const auto x = random_param(rng, {2, 4, 8, 8});
    const auto out = spade_normalize(x, random_param(rng, {2, 2, 8, 8}), w);
    const auto ref = nn::normalize(x, nn::NormMode::Batch, 1e-5);
    CHECK(std::equal(out.value().begin(), out.value().end(), ref.value().begin()));
    for (int c = 0; c < 4; ++c) {
      double mean = 0.0, var = 0.0;
      for (int n = 0; n < 2; ++n) {
        for (int i = 0; i < 64; ++i) mean += out.value()[(n * 4 + c) * 64 + i] / 128.0;
      }
      for (int n = 0; n < 2; ++n) {
        for (int i = 0; i < 64; ++i) {
          const double d = out.value()[(n * 4 + c) * 64 + i] - mean;
          var += d * d / 128.0;
        }
      }
      CHECK(std::fabs(mean) < 1e-12);
      CHECK(var == doctest::Approx(1.0).epsilon(1e-3));
    }
  }
}

TEST_CASE("spade_normalize ignores per-channel affine rescaling") {
  WeightInit init(3);
  SpadeLayerWeights<double> w(2, 3, 4, init);
  SplitMix64 rng(4);
  const auto x = random_param(rng, {1, 4, 8, 8});
  const auto m = random_param(rng, {1, 2, 16, 16});
  std::vector<double> scaled(x.value().begin(), x.value().end());
  for (auto& v : scaled) v = 10.0 * v + 3.0;
  const auto a = spade_normalize(x, m, w);
  const auto b = spade_normalize(V::constant(x.shape(), scaled), m, w);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.value().size(); ++i) worst = std::max(worst, std::fabs(a.value()[i] - b.value()[i]));
  CHECK(worst < 1e-4);
}

TEST_CASE("spade_normalize gradients, modulation map resized") {
  WeightInit init(5, 0.3);
  SpadeLayerWeights<double> w(2, 3, 4, init);
  SplitMix64 rng(6);
  auto x = random_param(rng, {2, 4, 8, 8});
  auto m = random_param(rng, {2, 2, 16, 16});
  ParamList<double> params;
  w.collect(params, "n");
  auto leaves = leaves_of(params);
  leaves.push_back(x);
  leaves.push_back(m);
  // the plain sum has structurally zero bias gradients, so weight the outputs
  const auto r = gradcheck(leaves, [&] {
    SplitMix64 local(7);
    return testsupport::weighted_total(spade_normalize(x, m, w), local);
  });
  CAPTURE(r);
  CHECK(r.max_rel < 1e-4);
  CHECK_THROWS_AS(spade_normalize(random_param(rng, {1, 5, 8, 8}), m, w), InvalidArgument);
}

TEST_CASE("generator shapes, range and parameter counts") {
  for (auto v : {Variant::Spade, Variant::Pix2PixHD}) {
    for (int s : {16, 64}) {
      const Generator<float> g(tiny(v, s), 7);
      SplitMix64 rng(8);
      std::vector<float> in(2 * s * s);
      for (auto& x : in) x = static_cast<float>(4.0 * rng.uniform() - 2.0);
      const auto out = generate(g, curation::ModelArray{2, s, s, in});
      CHECK(out.channels == 3);
      CHECK(out.height == s);
      CHECK(out.width == s);
      for (float y : out.data) CHECK((y >= -1.0f && y <= 1.0f));
      CHECK(g.parameter_count() == testsupport::expected_parameters(g.config()));
      CHECK_THROWS_AS(generate(g, curation::ModelArray{2, s / 2, s / 2, std::vector<float>(s * s / 2)}),
                      InvalidArgument);
    }
  }
  GeneratorConfig spade_default;
  CHECK(Generator<float>(spade_default, 0).parameter_count() == testsupport::expected_parameters(spade_default));
  GeneratorConfig p2p_default;
  p2p_default.variant = Variant::Pix2PixHD;
  CHECK(Generator<float>(p2p_default, 0).parameter_count() == testsupport::expected_parameters(p2p_default));
}

TEST_CASE("generator initialization is seeded") {
  const auto cfg = tiny(Variant::Spade, 16);
  const Generator<float> a(cfg, 9), b(cfg, 9), c(cfg, 10);
  CHECK(export_tensors(a.parameters()) == export_tensors(b.parameters()));
  CHECK_FALSE(export_tensors(a.parameters()) == export_tensors(c.parameters()));
  const auto p = a.parameters();
  // biases start at zero, weights have roughly the configured spread
  double sq = 0.0;
  std::size_t n = 0;
  for (const auto& t : p) {
    if (t.name.ends_with(".bias")) {
      for (float v : t.var.value()) CHECK(v == 0.0f);
    } else {
      for (float v : t.var.value()) sq += static_cast<double>(v) * v, ++n;
    }
  }
  CHECK(std::sqrt(sq / n) == doctest::Approx(0.02).epsilon(0.05));
}

TEST_CASE("invalid generator configs") {
  GeneratorConfig g;
  g.image_size = 128;
  CHECK_THROWS_AS(g.validate(), InvalidArgument);
  g.variant = Variant::Pix2PixHD;
  g.image_size = 66;
  CHECK_THROWS_AS(g.validate(), InvalidArgument);
}

TEST_CASE("tiny generators match finite differences") {
  for (auto v : {Variant::Spade, Variant::Pix2PixHD}) {
    const Generator<double> g(tiny(v, 16), 11);
    SplitMix64 rng(12);
    auto x = random_param(rng, {1, 2, 16, 16});
    auto leaves = leaves_of(g.parameters());
    leaves.push_back(x);
    const auto r = gradcheck(leaves, [&] {
      SplitMix64 local(13);
      return testsupport::weighted_total(g.forward(x), local);
    }, 1e-6, 1e-4);  // a larger step straddles relu kinks
    CAPTURE(to_string(v));
    CAPTURE(r);
    CHECK(r.max_rel < 1e-4);
  }
}

TEST_CASE("discriminator scales and logit extents") {
  DiscriminatorConfig d;
  d.base_width = 4;
  for (int s : {64, 256}) {
    const Discriminator<float> disc(d, 5, 3);
    const auto s1 = nn::Var<float>::constant({1, 2, s, s}, std::vector<float>(2 * s * s, 0.1f));
    const auto rgb = nn::Var<float>::constant({1, 3, s, s}, std::vector<float>(3 * s * s, -0.2f));
    const auto maps = disc.forward(s1, rgb);
    REQUIRE(maps.size() == 2);
    for (int k = 0; k < 2; ++k) {
      const int e = testsupport::expected_logit_size(s, k, d.n_layers);
      CHECK(maps[k].shape() == nn::Shape{1, 1, e, e});
      CHECK(Discriminator<float>::logit_size(d, s, k) == e);
    }
    CHECK(maps[1].shape().h * 2 == maps[0].shape().h);
    const auto again = disc.forward(s1, rgb);
    CHECK(std::equal(again[0].value().begin(), again[0].value().end(), maps[0].value().begin()));
  }
  const Discriminator<float> disc(d, 5, 3);
  const auto s1 = nn::Var<float>::constant({1, 2, 32, 32}, std::vector<float>(2 * 32 * 32));
  const auto rgb = nn::Var<float>::constant({1, 3, 16, 16}, std::vector<float>(3 * 16 * 16));
  CHECK_THROWS_AS(disc.forward(s1, rgb), InvalidArgument);
}

TEST_CASE("discriminator gradients") {
  DiscriminatorConfig d{2, 2, 3};
  const Discriminator<double> disc(d, 5, 14);
  SplitMix64 rng(15);
  auto s1 = random_param(rng, {1, 2, 16, 16});
  auto rgb = random_param(rng, {1, 3, 16, 16});
  auto leaves = leaves_of(disc.parameters());
  leaves.push_back(rgb);
  for (auto kind : {GanKind::Hinge, GanKind::LSGAN}) {
    const auto r = gradcheck(leaves, [&] { return gan_loss(disc.forward(s1, rgb), GanRole::G, kind); }, 1e-5, 1e-4);
    CAPTURE(r);
    CHECK(r.max_rel < 1e-4);
  }
}

TEST_CASE("gan loss values") {
  auto maps = [](double v) {
    return std::vector<V>{V::constant({1, 1, 2, 2}, std::vector<double>(4, v)),
                          V::constant({1, 1, 1, 1}, std::vector<double>(1, v))};
  };
  CHECK(gan_loss(maps(1.0), GanRole::DReal, GanKind::Hinge).item() == 0.0);
  CHECK(gan_loss(maps(0.0), GanRole::DReal, GanKind::Hinge).item() == 1.0);
  CHECK(gan_loss(maps(1.0), GanRole::G, GanKind::LSGAN).item() == 0.0);
  CHECK(gan_loss(maps(0.5), GanRole::DFake, GanKind::Hinge).item() == 1.5);
  CHECK(gan_loss(maps(0.5), GanRole::G, GanKind::Hinge).item() == -0.5);
  CHECK(gan_loss(maps(0.5), GanRole::DFake, GanKind::LSGAN).item() == 0.25);

  // every element of every scale counts once
  const std::vector<V> uneven{V::constant({1, 1, 2, 2}, {0, 0, 0, 0}), V::constant({1, 1, 1, 1}, {5})};
  CHECK(gan_loss(uneven, GanRole::G, GanKind::Hinge).item() == -1.0);
  CHECK_THROWS_AS(gan_loss(std::vector<V>{}, GanRole::G, GanKind::Hinge), InvalidArgument);
}

TEST_CASE("l1 loss") {
  SplitMix64 rng(16);
  const auto a = random_param(rng, {2, 3, 5, 4});
  const auto b = random_param(rng, {2, 3, 5, 4});
  CHECK(sargen::l1_loss(a, a).item() == 0.0);
  std::vector<double> shifted(a.value().begin(), a.value().end());
  for (auto& v : shifted) v += 0.5;
  CHECK(sargen::l1_loss(a, V::constant(a.shape(), shifted)).item() == doctest::Approx(0.5).epsilon(1e-15));
  double oracle = 0.0;
  for (std::size_t i = 0; i < a.value().size(); ++i) oracle += std::fabs(a.value()[i] - b.value()[i]);
  oracle /= static_cast<double>(a.value().size());
  CHECK(std::fabs(sargen::l1_loss(a, b).item() - oracle) < 1e-9);
  CHECK_THROWS_AS(sargen::l1_loss(a, random_param(rng, {1, 3, 5, 4})), InvalidArgument);
}

TEST_CASE("loss table rows") {
  CHECK(total_generator_loss(LossConfig{0.0, 1.0, GanKind::Hinge}, 0.7, 0.03) == 0.03);
  CHECK(total_generator_loss(LossConfig{1.0, 1000.0, GanKind::Hinge}, 0.2, 0.01) == doctest::Approx(10.2).epsilon(1e-12));
  CHECK(total_generator_loss(LossConfig{0.0, 100.0, GanKind::Hinge}, 0.0, 0.01) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS((LossConfig{0.0, 0.0, GanKind::Hinge}).validate(), InvalidArgument);
  CHECK_THROWS_AS((LossConfig{0.5, 1.0, GanKind::Hinge}).validate(), InvalidArgument);
}

TEST_CASE("weighted L1 gradient is proportional to plain L1 gradient") {
  const Generator<double> g(tiny(Variant::Spade, 16), 17);
  SplitMix64 rng(18);
  const auto x = random_param(rng, {2, 2, 16, 16});
  const auto target = random_param(rng, {2, 3, 16, 16});
  auto params = g.parameters();
  auto grads = [&](const LossConfig& cfg) {
    for (auto& p : params) p.var.zero_grad();
    total_generator_loss(cfg, V(), sargen::l1_loss(g.forward(x), target)).backward();
    std::vector<double> all;
    for (const auto& p : params) all.insert(all.end(), p.var.grad().begin(), p.var.grad().end());
    return all;
  };
  const auto plain = grads(LossConfig{0.0, 1.0, GanKind::Hinge});
  const auto weighted = grads(LossConfig{0.0, 100.0, GanKind::Hinge});
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < plain.size(); ++i) {
    diff = std::max(diff, std::fabs(weighted[i] - 100.0 * plain[i]));
    scale = std::max(scale, std::fabs(100.0 * plain[i]));
  }
  CHECK(diff / scale < 1e-6);
}

TEST_CASE("tensor export and import") {
  const auto cfg = tiny(Variant::Pix2PixHD, 16);
  const Generator<float> a(cfg, 1), b(cfg, 2);
  import_tensors(b.parameters(), export_tensors(a.parameters()));
  CHECK(export_tensors(a.parameters()) == export_tensors(b.parameters()));
  auto tensors = export_tensors(a.parameters());
  tensors[0].name = "other";
  CHECK_THROWS_AS(import_tensors(b.parameters(), tensors), InvalidArgument);
}
