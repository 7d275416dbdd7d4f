#pragma once

#include <vector>

#include "sar2rgb/nn/autograd.hpp"
#include "sar2rgb/sargen/config.hpp"

namespace sar2rgb::sargen {

enum class GanRole { DReal, DFake, G };

// Mean over every element of every scale (scales weighted equally per element).
//   Hinge:  D_REAL mean(relu(1 - l)), D_FAKE mean(relu(1 + l)), G -mean(l)
//   LSGAN:  D_REAL mean((l - 1)^2),   D_FAKE mean(l^2),         G mean((l - 1)^2)
template <typename T>
nn::Var<T> gan_loss(const std::vector<nn::Var<T>>& logit_maps, GanRole role, GanKind kind);

// Mean absolute difference.
template <typename T>
nn::Var<T> l1_loss(const nn::Var<T>& pred, const nn::Var<T>& target);

double total_generator_loss(const LossConfig& cfg, double gan_term, double l1_term);

// Differentiable form; `gan_term` may be undefined when cfg.gan_weight == 0.
template <typename T>
nn::Var<T> total_generator_loss(const LossConfig& cfg, const nn::Var<T>& gan_term, const nn::Var<T>& l1_term);

}  // namespace sar2rgb::sargen
