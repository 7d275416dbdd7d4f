#include "sar2rgb/sargen/config.hpp"

#include <set>
#include <string>

#include "sar2rgb/error.hpp"

namespace sar2rgb::sargen {

std::string_view to_string(Variant v) { return v == Variant::Spade ? "spade" : "pix2pixhd"; }
std::string_view to_string(GanKind k) { return k == GanKind::Hinge ? "hinge" : "lsgan"; }

Variant parse_variant(std::string_view name) {
  if (name == "spade" || name == "SPADE") return Variant::Spade;
  if (name == "pix2pixhd" || name == "PIX2PIXHD") return Variant::Pix2PixHD;
  throw InvalidArgument("unknown generator variant '" + std::string(name) + "'");
}

GanKind parse_gan_kind(std::string_view name) {
  if (name == "hinge" || name == "HINGE") return GanKind::Hinge;
  if (name == "lsgan" || name == "LSGAN") return GanKind::LSGAN;
  throw InvalidArgument("unknown GAN loss kind '" + std::string(name) + "'");
}

GanKind default_gan_kind(Variant v) { return v == Variant::Spade ? GanKind::Hinge : GanKind::LSGAN; }

void GeneratorConfig::validate() const {
  if (in_channels < 1 || out_channels < 1) throw InvalidArgument("generator channel counts must be >= 1");
  if (image_size < 1 || base_width < 1) throw InvalidArgument("image_size and base_width must be >= 1");
  if (variant == Variant::Spade) {
    if (seed_size < 1 || n_up_blocks < 0 || n_up_blocks > 16 || spade_hidden < 1) {
      throw InvalidArgument("invalid SPADE generator dimensions");
    }
    if (image_size != (seed_size << n_up_blocks)) {
      throw InvalidArgument("SPADE generator needs image_size == seed_size * 2^n_up_blocks (" +
                            std::to_string(image_size) + " != " + std::to_string(seed_size) + " * 2^" +
                            std::to_string(n_up_blocks) + ")");
    }
  } else {
    if (image_size % 4 != 0) throw InvalidArgument("pix2pixHD generator needs image_size divisible by 4");
    if (n_res_blocks < 0) throw InvalidArgument("n_res_blocks must be >= 0");
  }
}

void DiscriminatorConfig::validate() const {
  if (n_scales < 1 || n_layers < 1 || base_width < 1) {
    throw InvalidArgument("discriminator needs n_scales, n_layers and base_width >= 1");
  }
}

void LossConfig::validate() const {
  if (gan_weight != 0.0 && gan_weight != 1.0) throw InvalidArgument("gan_weight must be 0 or 1");
  if (!(l1_weight >= 0.0)) throw InvalidArgument("l1_weight must be >= 0");
  if (gan_weight == 0.0 && l1_weight == 0.0) throw InvalidArgument("loss config needs a nonzero weight");
}

namespace {

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> keys, const char* what) {
  if (!j.is_object()) throw InvalidArgument(std::string(what) + " must be a JSON object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, _] : j.items()) {
    if (!allowed.contains(k)) throw InvalidArgument(std::string("unknown key '") + k + "' in " + what);
  }
}

template <typename V>
void read_opt(const nlohmann::json& j, const char* key, V& out) {
  if (const auto it = j.find(key); it != j.end()) out = it->get<V>();
}

}  // namespace

void to_json(nlohmann::json& j, const GeneratorConfig& c) {
  j = nlohmann::json{{"variant", to_string(c.variant)}, {"in_channels", c.in_channels},
                     {"out_channels", c.out_channels},  {"image_size", c.image_size},
                     {"base_width", c.base_width},      {"n_up_blocks", c.n_up_blocks},
                     {"n_res_blocks", c.n_res_blocks},  {"seed_size", c.seed_size},
                     {"spade_hidden", c.spade_hidden}};
}

void from_json(const nlohmann::json& j, GeneratorConfig& c) {
  reject_unknown(j,
                 {"variant", "in_channels", "out_channels", "image_size", "base_width", "n_up_blocks", "n_res_blocks",
                  "seed_size", "spade_hidden"},
                 "generator config");
  GeneratorConfig d;
  if (const auto it = j.find("variant"); it != j.end()) d.variant = parse_variant(it->get<std::string>());
  read_opt(j, "in_channels", d.in_channels);
  read_opt(j, "out_channels", d.out_channels);
  read_opt(j, "image_size", d.image_size);
  read_opt(j, "base_width", d.base_width);
  read_opt(j, "n_up_blocks", d.n_up_blocks);
  read_opt(j, "n_res_blocks", d.n_res_blocks);
  read_opt(j, "seed_size", d.seed_size);
  read_opt(j, "spade_hidden", d.spade_hidden);
  d.validate();
  c = d;
}

void to_json(nlohmann::json& j, const DiscriminatorConfig& c) {
  j = nlohmann::json{{"n_scales", c.n_scales}, {"n_layers", c.n_layers}, {"base_width", c.base_width}};
}

void from_json(const nlohmann::json& j, DiscriminatorConfig& c) {
  reject_unknown(j, {"n_scales", "n_layers", "base_width"}, "discriminator config");
  DiscriminatorConfig d;
  read_opt(j, "n_scales", d.n_scales);
  read_opt(j, "n_layers", d.n_layers);
  read_opt(j, "base_width", d.base_width);
  d.validate();
  c = d;
}

void to_json(nlohmann::json& j, const LossConfig& c) {
  j = nlohmann::json{{"gan_weight", c.gan_weight}, {"l1_weight", c.l1_weight}, {"gan_kind", to_string(c.gan_kind)}};
}

void from_json(const nlohmann::json& j, LossConfig& c) {
  reject_unknown(j, {"gan_weight", "l1_weight", "gan_kind"}, "loss config");
  LossConfig d;
  read_opt(j, "gan_weight", d.gan_weight);
  read_opt(j, "l1_weight", d.l1_weight);
  if (const auto it = j.find("gan_kind"); it != j.end()) d.gan_kind = parse_gan_kind(it->get<std::string>());
  d.validate();
  c = d;
}

}  // namespace sar2rgb::sargen
