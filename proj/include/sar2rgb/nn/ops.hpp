#pragma once

#include <vector>

#include "sar2rgb/nn/autograd.hpp"

namespace sar2rgb::nn {

// Weight shape {out, in, k, k}; `bias` may be undefined.
template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, int stride, int pad);

// Weight shape {in, out, k, k}. Output extent (H-1)*stride - 2*pad + k + output_pad.
template <typename T>
Var<T> conv_transpose2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, int stride, int pad,
                        int output_pad);

enum class NormMode {
  Batch,     // statistics per channel over (N, H, W)
  Instance,  // statistics per (sample, channel) over (H, W)
};

// Parameter-free normalization with biased variance: (x - mean) / sqrt(var + eps).
template <typename T>
Var<T> normalize(const Var<T>& x, NormMode mode, T eps);

// x_hat * (1 + gamma) + beta, all the same shape.
template <typename T>
Var<T> modulate(const Var<T>& x_hat, const Var<T>& gamma, const Var<T>& beta);

template <typename T>
Var<T> relu(const Var<T>& x);
template <typename T>
Var<T> leaky_relu(const Var<T>& x, T slope);
template <typename T>
Var<T> tanh(const Var<T>& x);
template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b);

// Nearest-neighbour resampling: source index floor(dst * in / out).
template <typename T>
Var<T> resize_nearest(const Var<T>& x, int height, int width);

// 2x2 mean pooling with stride 2; odd trailing rows/columns are dropped.
template <typename T>
Var<T> avg_pool2(const Var<T>& x);

template <typename T>
Var<T> concat_channels(const Var<T>& a, const Var<T>& b);

// Scalar reductions.
template <typename T>
Var<T> sum(const Var<T>& x);
template <typename T>
Var<T> l1_loss(const Var<T>& pred, const Var<T>& target);
template <typename T>
Var<T> weighted_sum(const std::vector<Var<T>>& scalars, const std::vector<T>& weights);

}  // namespace sar2rgb::nn
