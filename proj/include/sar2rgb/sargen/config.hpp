#pragma once

#include <cstddef>
#include <string_view>

#include <json.hpp>

namespace sar2rgb::sargen {

enum class Variant { Spade, Pix2PixHD };
enum class GanKind { Hinge, LSGAN };

std::string_view to_string(Variant v);
std::string_view to_string(GanKind k);
Variant parse_variant(std::string_view name);
GanKind parse_gan_kind(std::string_view name);

struct GeneratorConfig {
  Variant variant = Variant::Spade;
  int in_channels = 2;   // VV, VH
  int out_channels = 3;  // RGB
  int image_size = 256;
  int base_width = 64;
  int n_up_blocks = 5;   // SPADE
  int n_res_blocks = 9;  // pix2pixHD
  int seed_size = 8;     // SPADE
  int spade_hidden = 128;

  void validate() const;
  bool operator==(const GeneratorConfig&) const = default;
};

struct DiscriminatorConfig {
  int n_scales = 2;
  int n_layers = 4;
  int base_width = 64;

  void validate() const;
  bool operator==(const DiscriminatorConfig&) const = default;
};

// One row of the loss table: total = gan_weight * gan + l1_weight * l1.
struct LossConfig {
  double gan_weight = 0.0;  // 0 or 1
  double l1_weight = 1.0;
  GanKind gan_kind = GanKind::Hinge;

  void validate() const;
  bool uses_gan() const { return gan_weight != 0.0; }
  bool operator==(const LossConfig&) const = default;

  static LossConfig l1_only() { return {0.0, 1.0, GanKind::Hinge}; }
};

// Default adversarial formulation for each generator lineage.
GanKind default_gan_kind(Variant v);

void to_json(nlohmann::json& j, const GeneratorConfig& c);
void from_json(const nlohmann::json& j, GeneratorConfig& c);
void to_json(nlohmann::json& j, const DiscriminatorConfig& c);
void from_json(const nlohmann::json& j, DiscriminatorConfig& c);
void to_json(nlohmann::json& j, const LossConfig& c);
void from_json(const nlohmann::json& j, LossConfig& c);

}  // namespace sar2rgb::sargen
