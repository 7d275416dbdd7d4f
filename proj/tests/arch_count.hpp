#pragma once

#include <cstddef>

#include "sar2rgb/sargen/config.hpp"

namespace testsupport {

// Parameter counts written out from the layer list, independent of the model code.
inline std::size_t conv_params(std::size_t k, std::size_t in, std::size_t out, bool bias = true) {
  return k * k * in * out + (bias ? out : 0);
}

inline std::size_t spade_norm_params(std::size_t cm, std::size_t hidden, std::size_t c) {
  return conv_params(3, cm, hidden) + 2 * conv_params(3, hidden, c);
}

inline std::size_t expected_parameters(const sar2rgb::sargen::GeneratorConfig& g) {
  const std::size_t b = g.base_width, cin = g.in_channels, cout = g.out_channels;
  if (g.variant == sar2rgb::sargen::Variant::Spade) {
    std::size_t ch = b << g.n_up_blocks;
    std::size_t n = conv_params(3, cin, ch);
    for (int k = 0; k < g.n_up_blocks; ++k) {
      const std::size_t out = ch / 2;
      n += spade_norm_params(cin, g.spade_hidden, ch) + conv_params(3, ch, out);
      n += spade_norm_params(cin, g.spade_hidden, out) + conv_params(3, out, out);
      n += ch * out;  // 1x1 skip, no bias
      ch = out;
    }
    return n + conv_params(3, b, cout);
  }
  std::size_t n = conv_params(7, cin, b) + conv_params(3, b, 2 * b) + conv_params(3, 2 * b, 4 * b);
  n += static_cast<std::size_t>(g.n_res_blocks) * 2 * conv_params(3, 4 * b, 4 * b);
  n += conv_params(3, 4 * b, 2 * b) + conv_params(3, 2 * b, b);
  return n + conv_params(7, b, cout);
}

// Patch-network logit extent: n_layers of (k=4, s=2, p=1), then (k=3, s=1, p=1).
inline int expected_logit_size(int image_size, int scale, int n_layers) {
  int s = image_size;
  for (int k = 0; k < scale; ++k) s /= 2;
  for (int l = 0; l < n_layers; ++l) s = (s + 2 * 1 - 4) / 2 + 1;
  return (s + 2 * 1 - 3) / 1 + 1;
}

}  // namespace testsupport
