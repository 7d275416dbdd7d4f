#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sar2rgb/nn/autograd.hpp"
#include "sar2rgb/nn/ops.hpp"
#include "sar2rgb/rng.hpp"

namespace sar2rgb::sargen {

using nn::NormMode;
using nn::Shape;
using nn::Var;

template <typename T>
struct NamedParam {
  std::string name;
  Var<T> var;
};

template <typename T>
using ParamList = std::vector<NamedParam<T>>;

// Gaussian(0, 0.02) weights, zero biases, drawn in construction order.
class WeightInit {
 public:
  explicit WeightInit(std::uint64_t seed, double stddev = 0.02) : rng_(seed), stddev_(stddev) {}
  template <typename T>
  std::vector<T> gaussian(std::size_t n) {
    std::vector<T> v(n);
    for (auto& x : v) x = static_cast<T>(rng_.gaussian() * stddev_);
    return v;
  }

 private:
  SplitMix64 rng_;
  double stddev_;
};

template <typename T>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(int in, int out, int kernel, int stride, int pad, bool bias, WeightInit& init);

  Var<T> operator()(const Var<T>& x) const { return nn::conv2d(x, weight, bias, stride_, pad_); }
  void collect(ParamList<T>& out, const std::string& prefix) const;

  Var<T> weight;  // {out, in, k, k}
  Var<T> bias;    // {1, out, 1, 1} or undefined

 private:
  int stride_ = 1;
  int pad_ = 0;
};

template <typename T>
class ConvTranspose2d {
 public:
  ConvTranspose2d() = default;
  ConvTranspose2d(int in, int out, int kernel, int stride, int pad, int output_pad, WeightInit& init);

  Var<T> operator()(const Var<T>& x) const {
    return nn::conv_transpose2d(x, weight, bias, stride_, pad_, output_pad_);
  }
  void collect(ParamList<T>& out, const std::string& prefix) const;

  Var<T> weight;  // {in, out, k, k}
  Var<T> bias;

 private:
  int stride_ = 2;
  int pad_ = 1;
  int output_pad_ = 1;
};

/// Weights of one spatially-adaptive normalization layer: a shared 3x3
/// convolution over the modulation map followed by two 3x3 heads producing
/// per-pixel scale and shift for the normalized features.
template <typename T>
struct SpadeLayerWeights {
  SpadeLayerWeights() = default;
  SpadeLayerWeights(int modulation_channels, int hidden, int feature_channels, WeightInit& init, T epsilon = T(1e-5));

  Conv2d<T> shared_conv;
  Conv2d<T> gamma_conv;
  Conv2d<T> beta_conv;
  T epsilon = T(1e-5);

  void collect(ParamList<T>& out, const std::string& prefix) const;
};

// x_hat = normalize(x) over (N, H, W) per channel; m is resized to x's extent
// by nearest neighbour; h = relu(shared(m));
// out = x_hat * (1 + gamma(h)) + beta(h).
template <typename T>
Var<T> spade_normalize(const Var<T>& x, const Var<T>& m, const SpadeLayerWeights<T>& w);

// Two (SPADE -> relu -> 3x3 conv) stages plus a 1x1 skip projection when
// the channel count changes.
template <typename T>
class SpadeResBlock {
 public:
  SpadeResBlock(int in, int out, int modulation_channels, int hidden, WeightInit& init);
  Var<T> operator()(const Var<T>& x, const Var<T>& m) const;
  void collect(ParamList<T>& out, const std::string& prefix) const;

 private:
  SpadeLayerWeights<T> norm0_;
  Conv2d<T> conv0_;
  SpadeLayerWeights<T> norm1_;
  Conv2d<T> conv1_;
  bool learned_skip_;
  Conv2d<T> skip_;
};

// pix2pixHD residual block: conv3 -> IN -> relu -> conv3 -> IN, plus identity.
template <typename T>
class ResBlock {
 public:
  ResBlock(int channels, WeightInit& init);
  Var<T> operator()(const Var<T>& x) const;
  void collect(ParamList<T>& out, const std::string& prefix) const;

 private:
  Conv2d<T> conv0_;
  Conv2d<T> conv1_;
};

template <typename T>
std::size_t count_parameters(const ParamList<T>& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.var.shape().size();
  return n;
}

}  // namespace sar2rgb::sargen
