#include "sar2rgb/sargen/layers.hpp"

#include "sar2rgb/error.hpp"

namespace sar2rgb::sargen {

template <typename T>
Conv2d<T>::Conv2d(int in, int out, int kernel, int stride, int pad, bool bias, WeightInit& init)
    : stride_(stride), pad_(pad) {
  const Shape ws{out, in, kernel, kernel};
  weight = Var<T>::parameter(ws, init.gaussian<T>(ws.size()));
  if (bias) this->bias = Var<T>::parameter(Shape{1, out, 1, 1}, std::vector<T>(out, T(0)));
}

template <typename T>
void Conv2d<T>::collect(ParamList<T>& out, const std::string& prefix) const {
  out.push_back({prefix + ".weight", weight});
  if (bias.defined()) out.push_back({prefix + ".bias", bias});
}

template <typename T>
ConvTranspose2d<T>::ConvTranspose2d(int in, int out, int kernel, int stride, int pad, int output_pad,
                                    WeightInit& init)
    : stride_(stride), pad_(pad), output_pad_(output_pad) {
  const Shape ws{in, out, kernel, kernel};
  weight = Var<T>::parameter(ws, init.gaussian<T>(ws.size()));
  bias = Var<T>::parameter(Shape{1, out, 1, 1}, std::vector<T>(out, T(0)));
}

template <typename T>
void ConvTranspose2d<T>::collect(ParamList<T>& out, const std::string& prefix) const {
  out.push_back({prefix + ".weight", weight});
  out.push_back({prefix + ".bias", bias});
}

template <typename T>
SpadeLayerWeights<T>::SpadeLayerWeights(int modulation_channels, int hidden, int feature_channels, WeightInit& init,
                                        T epsilon)
    : shared_conv(modulation_channels, hidden, 3, 1, 1, true, init),
      gamma_conv(hidden, feature_channels, 3, 1, 1, true, init),
      beta_conv(hidden, feature_channels, 3, 1, 1, true, init),
      epsilon(epsilon) {}

template <typename T>
void SpadeLayerWeights<T>::collect(ParamList<T>& out, const std::string& prefix) const {
  shared_conv.collect(out, prefix + ".shared");
  gamma_conv.collect(out, prefix + ".gamma");
  beta_conv.collect(out, prefix + ".beta");
}

template <typename T>
Var<T> spade_normalize(const Var<T>& x, const Var<T>& m, const SpadeLayerWeights<T>& w) {
  const Shape xs = x.shape();
  const Shape ms = m.shape();
  if (ms.n != xs.n) throw InvalidArgument("spade_normalize: batch of modulation map does not match features");
  if (ms.c != w.shared_conv.weight.shape().c) {
    throw InvalidArgument("spade_normalize: modulation map has " + std::to_string(ms.c) +
                          " channels, weights expect " + std::to_string(w.shared_conv.weight.shape().c));
  }
  if (w.gamma_conv.weight.shape().n != xs.c || w.beta_conv.weight.shape().n != xs.c) {
    throw InvalidArgument("spade_normalize: modulation heads do not match " + std::to_string(xs.c) + " feature channels");
  }
  const auto x_hat = nn::normalize(x, NormMode::Batch, w.epsilon);
  const auto m_resized = (ms.h == xs.h && ms.w == xs.w) ? m : nn::resize_nearest(m, xs.h, xs.w);
  const auto h = nn::relu(w.shared_conv(m_resized));
  return nn::modulate(x_hat, w.gamma_conv(h), w.beta_conv(h));
}

template <typename T>
SpadeResBlock<T>::SpadeResBlock(int in, int out, int modulation_channels, int hidden, WeightInit& init)
    : norm0_(modulation_channels, hidden, in, init),
      conv0_(in, out, 3, 1, 1, true, init),
      norm1_(modulation_channels, hidden, out, init),
      conv1_(out, out, 3, 1, 1, true, init),
      learned_skip_(in != out) {
  if (learned_skip_) skip_ = Conv2d<T>(in, out, 1, 1, 0, false, init);
}

template <typename T>
Var<T> SpadeResBlock<T>::operator()(const Var<T>& x, const Var<T>& m) const {
  auto h = conv0_(nn::relu(spade_normalize(x, m, norm0_)));
  h = conv1_(nn::relu(spade_normalize(h, m, norm1_)));
  return nn::add(h, learned_skip_ ? skip_(x) : x);
}

template <typename T>
void SpadeResBlock<T>::collect(ParamList<T>& out, const std::string& prefix) const {
  norm0_.collect(out, prefix + ".norm0");
  conv0_.collect(out, prefix + ".conv0");
  norm1_.collect(out, prefix + ".norm1");
  conv1_.collect(out, prefix + ".conv1");
  if (learned_skip_) skip_.collect(out, prefix + ".skip");
}

template <typename T>
ResBlock<T>::ResBlock(int channels, WeightInit& init)
    : conv0_(channels, channels, 3, 1, 1, true, init), conv1_(channels, channels, 3, 1, 1, true, init) {}

template <typename T>
Var<T> ResBlock<T>::operator()(const Var<T>& x) const {
  auto h = nn::relu(nn::normalize(conv0_(x), NormMode::Instance, T(1e-5)));
  h = nn::normalize(conv1_(h), NormMode::Instance, T(1e-5));
  return nn::add(h, x);
}

template <typename T>
void ResBlock<T>::collect(ParamList<T>& out, const std::string& prefix) const {
  conv0_.collect(out, prefix + ".conv0");
  conv1_.collect(out, prefix + ".conv1");
}

template class Conv2d<float>;
template class Conv2d<double>;
template class ConvTranspose2d<float>;
template class ConvTranspose2d<double>;
template struct SpadeLayerWeights<float>;
template struct SpadeLayerWeights<double>;
template class SpadeResBlock<float>;
template class SpadeResBlock<double>;
template class ResBlock<float>;
template class ResBlock<double>;
template Var<float> spade_normalize(const Var<float>&, const Var<float>&, const SpadeLayerWeights<float>&);
template Var<double> spade_normalize(const Var<double>&, const Var<double>&, const SpadeLayerWeights<double>&);

}  // namespace sar2rgb::sargen
