#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sar2rgb/curation/curation.hpp"
#include "sar2rgb/sargen/config.hpp"
#include "sar2rgb/sargen/layers.hpp"

namespace sar2rgb::sargen {

// Serializable copy of one parameter.
struct NamedTensor {
  std::string name;
  std::vector<int> shape;
  std::vector<float> data;

  bool operator==(const NamedTensor&) const = default;
};

template <typename T>
std::vector<NamedTensor> export_tensors(const ParamList<T>& params);
// Copies values into params by name; names, order and shapes must match.
template <typename T>
void import_tensors(const ParamList<T>& params, const std::vector<NamedTensor>& tensors);

/// Conditional generator mapping a normalized SAR pair [N, 2, S, S] to RGB in
/// [-1, 1] of shape [N, 3, S, S].
///
/// SPADE: the SAR map, resized to seed_size, feeds a 3x3 conv to
/// base_width * 2^n_up_blocks channels; each stage is a SPADE residual block
/// (conditioned on the full-resolution SAR map) that halves the channels,
/// followed by 2x nearest upsampling; relu, 3x3 conv, tanh close the net.
///
/// pix2pixHD: 7x7 conv, two stride-2 convs, n_res_blocks residual blocks, two
/// stride-2 transposed convs and a 7x7 output conv with tanh, instance norm
/// and relu between stages.
template <typename T>
class Generator {
 public:
  Generator(const GeneratorConfig& config, std::uint64_t seed);

  Var<T> forward(const Var<T>& s1) const;
  ParamList<T> parameters() const;
  std::size_t parameter_count() const { return count_parameters(parameters()); }
  const GeneratorConfig& config() const { return config_; }

 private:
  GeneratorConfig config_;
  // SPADE
  Conv2d<T> head_;
  std::vector<SpadeResBlock<T>> spade_blocks_;
  // pix2pixHD
  Conv2d<T> front_;
  std::vector<Conv2d<T>> down_;
  std::vector<ResBlock<T>> res_blocks_;
  std::vector<ConvTranspose2d<T>> up_;
  // shared
  Conv2d<T> out_;
};

/// Multi-scale PatchGAN. Scale k sees the channel concatenation of SAR and
/// RGB average-pooled k times by 2 and emits one logit map (no sigmoid).
/// Each scale: 4x4 stride-2 convs (leaky relu 0.2, instance norm after the
/// first), widths doubling up to 8x base, then a 3x3 conv to one channel.
template <typename T>
class Discriminator {
 public:
  Discriminator(const DiscriminatorConfig& config, int in_channels, std::uint64_t seed);

  std::vector<Var<T>> forward(const Var<T>& s1, const Var<T>& rgb) const;
  ParamList<T> parameters() const;
  std::size_t parameter_count() const { return count_parameters(parameters()); }
  const DiscriminatorConfig& config() const { return config_; }

  // Logit-map extent for a square input of the given size at scale k.
  static int logit_size(const DiscriminatorConfig& config, int image_size, int scale);

 private:
  struct PatchNet {
    std::vector<Conv2d<T>> convs;
  };
  DiscriminatorConfig config_;
  int in_channels_;
  std::vector<PatchNet> scales_;
};

// Seed offset separating discriminator init from generator init.
inline constexpr std::uint64_t kDiscriminatorSeedSalt = 0xD15C0000D15C0000ULL;

// Frozen-weight inference on one model-space SAR array [2, S, S].
curation::ModelArray generate(const Generator<float>& g, const curation::ModelArray& s1);

}  // namespace sar2rgb::sargen
