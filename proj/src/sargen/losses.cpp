#include "sar2rgb/sargen/losses.hpp"

#include "sar2rgb/error.hpp"
#include "sar2rgb/nn/ops.hpp"

namespace sar2rgb::sargen {

using nn::Node;
using nn::Var;

namespace {

// Per-element loss value and derivative.
template <typename T>
std::pair<T, T> gan_term(T l, GanRole role, GanKind kind) {
  if (kind == GanKind::Hinge) {
    switch (role) {
      case GanRole::DReal: return l < T(1) ? std::pair{T(1) - l, T(-1)} : std::pair{T(0), T(0)};
      case GanRole::DFake: return l > T(-1) ? std::pair{T(1) + l, T(1)} : std::pair{T(0), T(0)};
      case GanRole::G: return {-l, T(-1)};
    }
  }
  switch (role) {
    case GanRole::DReal:
    case GanRole::G: return {(l - T(1)) * (l - T(1)), T(2) * (l - T(1))};
    case GanRole::DFake: return {l * l, T(2) * l};
  }
  return {T(0), T(0)};
}

}  // namespace

template <typename T>
Var<T> gan_loss(const std::vector<Var<T>>& logit_maps, GanRole role, GanKind kind) {
  if (logit_maps.empty()) throw InvalidArgument("gan_loss needs at least one logit map");
  auto out = std::make_shared<Node<T>>();
  out->shape = nn::Shape{};
  std::size_t count = 0;
  double total = 0.0;
  for (const auto& m : logit_maps) {
    count += m.value().size();
    for (T l : m.value()) total += gan_term(l, role, kind).first;
    if (nn::grad_enabled() && m.requires_grad()) {
      out->requires_grad = true;
      out->parents.push_back(m.node());
    }
  }
  if (count == 0) throw InvalidArgument("gan_loss: empty logit maps");
  out->value.assign(1, static_cast<T>(total / static_cast<double>(count)));
  if (out->requires_grad) {
    out->backward = [maps = out->parents, role, kind, count](Node<T>& self) {
      const T scale = static_cast<T>(self.grad[0] / static_cast<double>(count));
      for (const auto& m : maps) {
        auto& d = m->ensure_grad();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += scale * gan_term(m->value[i], role, kind).second;
      }
    };
  }
  return Var<T>(out);
}

template <typename T>
Var<T> l1_loss(const Var<T>& pred, const Var<T>& target) {
  return nn::l1_loss(pred, target);
}

double total_generator_loss(const LossConfig& cfg, double gan_term, double l1_term) {
  return cfg.gan_weight * gan_term + cfg.l1_weight * l1_term;
}

template <typename T>
Var<T> total_generator_loss(const LossConfig& cfg, const Var<T>& gan_term, const Var<T>& l1_term) {
  if (!cfg.uses_gan()) return nn::weighted_sum<T>({l1_term}, {static_cast<T>(cfg.l1_weight)});
  if (!gan_term.defined()) throw InvalidArgument("loss config weights a GAN term but none was supplied");
  if (cfg.l1_weight == 0.0) return nn::weighted_sum<T>({gan_term}, {static_cast<T>(cfg.gan_weight)});
  return nn::weighted_sum<T>({gan_term, l1_term}, {static_cast<T>(cfg.gan_weight), static_cast<T>(cfg.l1_weight)});
}

template Var<float> gan_loss(const std::vector<Var<float>>&, GanRole, GanKind);
template Var<double> gan_loss(const std::vector<Var<double>>&, GanRole, GanKind);
template Var<float> l1_loss(const Var<float>&, const Var<float>&);
template Var<double> l1_loss(const Var<double>&, const Var<double>&);
template Var<float> total_generator_loss(const LossConfig&, const Var<float>&, const Var<float>&);
template Var<double> total_generator_loss(const LossConfig&, const Var<double>&, const Var<double>&);

}  // namespace sar2rgb::sargen
