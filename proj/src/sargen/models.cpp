#include "sar2rgb/sargen/models.hpp"

#include <algorithm>
#include <set>

#include "sar2rgb/error.hpp"

namespace sar2rgb::sargen {

template <typename T>
std::vector<NamedTensor> export_tensors(const ParamList<T>& params) {
  std::vector<NamedTensor> out;
  out.reserve(params.size());
  for (const auto& p : params) {
    const Shape s = p.var.shape();
    NamedTensor t{p.name, {s.n, s.c, s.h, s.w}, {}};
    t.data.assign(p.var.value().begin(), p.var.value().end());
    out.push_back(std::move(t));
  }
  return out;
}

template <typename T>
void import_tensors(const ParamList<T>& params, const std::vector<NamedTensor>& tensors) {
  if (params.size() != tensors.size()) {
    throw InvalidArgument("weight set holds " + std::to_string(tensors.size()) + " tensors, model expects " +
                          std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    const auto& t = tensors[i];
    const Shape s = p.var.shape();
    if (t.name != p.name || t.shape != std::vector<int>{s.n, s.c, s.h, s.w} || t.data.size() != s.size()) {
      throw InvalidArgument("tensor '" + t.name + "' does not match model parameter '" + p.name + "'");
    }
    Var<T> var = p.var;
    auto dst = var.mutable_value();
    std::transform(t.data.begin(), t.data.end(), dst.begin(), [](float v) { return static_cast<T>(v); });
  }
}

template <typename T>
Generator<T>::Generator(const GeneratorConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  WeightInit init(seed);
  const auto& c = config_;
  if (c.variant == Variant::Spade) {
    const int top = c.base_width << c.n_up_blocks;
    head_ = Conv2d<T>(c.in_channels, top, 3, 1, 1, true, init);
    for (int k = 0; k < c.n_up_blocks; ++k) {
      const int in = c.base_width << (c.n_up_blocks - k);
      spade_blocks_.emplace_back(in, in / 2, c.in_channels, c.spade_hidden, init);
    }
    out_ = Conv2d<T>(c.base_width, c.out_channels, 3, 1, 1, true, init);
  } else {
    front_ = Conv2d<T>(c.in_channels, c.base_width, 7, 1, 3, true, init);
    down_.emplace_back(c.base_width, 2 * c.base_width, 3, 2, 1, true, init);
    down_.emplace_back(2 * c.base_width, 4 * c.base_width, 3, 2, 1, true, init);
    for (int i = 0; i < c.n_res_blocks; ++i) res_blocks_.emplace_back(4 * c.base_width, init);
    up_.emplace_back(4 * c.base_width, 2 * c.base_width, 3, 2, 1, 1, init);
    up_.emplace_back(2 * c.base_width, c.base_width, 3, 2, 1, 1, init);
    out_ = Conv2d<T>(c.base_width, c.out_channels, 7, 1, 3, true, init);
  }
}

template <typename T>
Var<T> Generator<T>::forward(const Var<T>& s1) const {
  const Shape s = s1.shape();
  const auto& c = config_;
  if (s.c != c.in_channels || s.h != c.image_size || s.w != c.image_size) {
    throw InvalidArgument("generator expects input [N," + std::to_string(c.in_channels) + "," +
                          std::to_string(c.image_size) + "," + std::to_string(c.image_size) + "], got " + s.str());
  }
  const T eps = T(1e-5);
  if (c.variant == Variant::Spade) {
    auto x = head_(nn::resize_nearest(s1, c.seed_size, c.seed_size));
    for (const auto& block : spade_blocks_) {
      x = block(x, s1);
      x = nn::resize_nearest(x, 2 * x.shape().h, 2 * x.shape().w);
    }
    return nn::tanh(out_(nn::relu(x)));
  }
  auto x = nn::relu(nn::normalize(front_(s1), NormMode::Instance, eps));
  for (const auto& d : down_) x = nn::relu(nn::normalize(d(x), NormMode::Instance, eps));
  for (const auto& r : res_blocks_) x = r(x);
  for (const auto& u : up_) x = nn::relu(nn::normalize(u(x), NormMode::Instance, eps));
  return nn::tanh(out_(x));
}

template <typename T>
ParamList<T> Generator<T>::parameters() const {
  ParamList<T> out;
  if (config_.variant == Variant::Spade) {
    head_.collect(out, "head");
    for (std::size_t k = 0; k < spade_blocks_.size(); ++k) spade_blocks_[k].collect(out, "block" + std::to_string(k));
  } else {
    front_.collect(out, "front");
    for (std::size_t k = 0; k < down_.size(); ++k) down_[k].collect(out, "down" + std::to_string(k));
    for (std::size_t k = 0; k < res_blocks_.size(); ++k) res_blocks_[k].collect(out, "res" + std::to_string(k));
    for (std::size_t k = 0; k < up_.size(); ++k) up_[k].collect(out, "up" + std::to_string(k));
  }
  out_.collect(out, "out");
  return out;
}

template <typename T>
Discriminator<T>::Discriminator(const DiscriminatorConfig& config, int in_channels, std::uint64_t seed)
    : config_(config), in_channels_(in_channels) {
  config_.validate();
  if (in_channels < 1) throw InvalidArgument("discriminator needs at least one input channel");
  WeightInit init(seed ^ kDiscriminatorSeedSalt);
  for (int k = 0; k < config_.n_scales; ++k) {
    PatchNet net;
    int width = config_.base_width;
    net.convs.emplace_back(in_channels, width, 4, 2, 1, true, init);
    for (int l = 1; l < config_.n_layers; ++l) {
      const int next = std::min(2 * width, 8 * config_.base_width);
      net.convs.emplace_back(width, next, 4, 2, 1, true, init);
      width = next;
    }
    net.convs.emplace_back(width, 1, 3, 1, 1, true, init);
    scales_.push_back(std::move(net));
  }
}

template <typename T>
int Discriminator<T>::logit_size(const DiscriminatorConfig& config, int image_size, int scale) {
  int s = image_size;
  for (int k = 0; k < scale; ++k) s /= 2;
  // 4x4 kernel, stride 2, pad 1: out = floor((s + 2 - 4) / 2) + 1 = floor(s / 2).
  for (int l = 0; l < config.n_layers; ++l) s = (s - 2) / 2 + 1;
  return s;  // the final 3x3 / pad 1 conv keeps the extent
}

template <typename T>
std::vector<Var<T>> Discriminator<T>::forward(const Var<T>& s1, const Var<T>& rgb) const {
  const Shape a = s1.shape(), b = rgb.shape();
  if (a.n != b.n || a.h != b.h || a.w != b.w) {
    throw InvalidArgument("discriminator inputs are misaligned: " + a.str() + " vs " + b.str());
  }
  auto x = nn::concat_channels(s1, rgb);
  if (x.shape().c != in_channels_) {
    throw InvalidArgument("discriminator expects " + std::to_string(in_channels_) + " input channels, got " +
                          std::to_string(x.shape().c));
  }
  const int min_extent = 1 << config_.n_layers;
  std::vector<Var<T>> logits;
  for (int k = 0; k < config_.n_scales; ++k) {
    if (k > 0) x = nn::avg_pool2(x);
    if (std::min(x.shape().h, x.shape().w) < min_extent) {
      throw InvalidArgument("input too small for " + std::to_string(config_.n_layers) + " patch layers at scale " +
                            std::to_string(k));
    }
    const auto& convs = scales_[k].convs;
    auto h = nn::leaky_relu(convs[0](x), T(0.2));
    for (std::size_t l = 1; l + 1 < convs.size(); ++l) {
      h = nn::leaky_relu(nn::normalize(convs[l](h), NormMode::Instance, T(1e-5)), T(0.2));
    }
    logits.push_back(convs.back()(h));
  }
  return logits;
}

template <typename T>
ParamList<T> Discriminator<T>::parameters() const {
  ParamList<T> out;
  for (std::size_t k = 0; k < scales_.size(); ++k) {
    for (std::size_t l = 0; l < scales_[k].convs.size(); ++l) {
      scales_[k].convs[l].collect(out, "scale" + std::to_string(k) + ".conv" + std::to_string(l));
    }
  }
  return out;
}

curation::ModelArray generate(const Generator<float>& g, const curation::ModelArray& s1) {
  if (s1.channels != g.config().in_channels || s1.height != g.config().image_size ||
      s1.width != g.config().image_size) {
    throw InvalidArgument("generate: input is " + std::to_string(s1.channels) + "x" + std::to_string(s1.height) +
                          "x" + std::to_string(s1.width) + ", generator expects " +
                          std::to_string(g.config().in_channels) + "x" + std::to_string(g.config().image_size) +
                          "x" + std::to_string(g.config().image_size));
  }
  nn::NoGradGuard no_grad;
  const auto x = Var<float>::constant(Shape{1, s1.channels, s1.height, s1.width}, s1.data);
  const auto y = g.forward(x);
  return {y.shape().c, y.shape().h, y.shape().w, std::vector<float>(y.value().begin(), y.value().end())};
}

template std::vector<NamedTensor> export_tensors(const ParamList<float>&);
template std::vector<NamedTensor> export_tensors(const ParamList<double>&);
template void import_tensors(const ParamList<float>&, const std::vector<NamedTensor>&);
template void import_tensors(const ParamList<double>&, const std::vector<NamedTensor>&);
template class Generator<float>;
template class Generator<double>;
template class Discriminator<float>;
template class Discriminator<double>;

}  // namespace sar2rgb::sargen
