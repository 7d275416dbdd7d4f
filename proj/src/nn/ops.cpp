#include "sar2rgb/nn/ops.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "sar2rgb/error.hpp"

namespace sar2rgb::nn {
namespace {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<Mat<T>>;
template <typename T>
using ConstMapMat = Eigen::Map<const Mat<T>>;

// Geometry of one convolution viewed as a GEMM over unrolled patches.
struct ConvGeom {
  int channels, height, width;  // image side
  int k, stride, pad;
  int out_h, out_w;             // column side

  std::size_t rows() const { return static_cast<std::size_t>(channels) * k * k; }
  std::size_t cols() const { return static_cast<std::size_t>(out_h) * out_w; }
  bool identity() const { return k == 1 && stride == 1 && pad == 0; }
};

template <typename T>
void im2col(const T* img, const ConvGeom& g, T* col) {
  const std::size_t cols = g.cols();
  for (int c = 0; c < g.channels; ++c) {
    const T* plane = img + static_cast<std::size_t>(c) * g.height * g.width;
    for (int ki = 0; ki < g.k; ++ki) {
      for (int kj = 0; kj < g.k; ++kj) {
        T* row = col + ((static_cast<std::size_t>(c) * g.k + ki) * g.k + kj) * cols;
        for (int oy = 0; oy < g.out_h; ++oy) {
          const int iy = oy * g.stride - g.pad + ki;
          T* dst = row + static_cast<std::size_t>(oy) * g.out_w;
          if (iy < 0 || iy >= g.height) {
            std::fill_n(dst, g.out_w, T(0));
            continue;
          }
          const T* src = plane + static_cast<std::size_t>(iy) * g.width;
          for (int ox = 0; ox < g.out_w; ++ox) {
            const int ix = ox * g.stride - g.pad + kj;
            dst[ox] = (ix >= 0 && ix < g.width) ? src[ix] : T(0);
          }
        }
      }
    }
  }
}

template <typename T>
void col2im(const T* col, const ConvGeom& g, T* img) {
  const std::size_t cols = g.cols();
  for (int c = 0; c < g.channels; ++c) {
    T* plane = img + static_cast<std::size_t>(c) * g.height * g.width;
    for (int ki = 0; ki < g.k; ++ki) {
      for (int kj = 0; kj < g.k; ++kj) {
        const T* row = col + ((static_cast<std::size_t>(c) * g.k + ki) * g.k + kj) * cols;
        for (int oy = 0; oy < g.out_h; ++oy) {
          const int iy = oy * g.stride - g.pad + ki;
          if (iy < 0 || iy >= g.height) continue;
          const T* src = row + static_cast<std::size_t>(oy) * g.out_w;
          T* dst = plane + static_cast<std::size_t>(iy) * g.width;
          for (int ox = 0; ox < g.out_w; ++ox) {
            const int ix = ox * g.stride - g.pad + kj;
            if (ix >= 0 && ix < g.width) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

template <typename T>
void require_same_shape(const Var<T>& a, const Var<T>& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw InvalidArgument(std::string(op) + ": shape mismatch " + a.shape().str() + " vs " + b.shape().str());
  }
}

template <typename T>
void accumulate(Node<T>& parent, const std::vector<T>& g) {
  auto& pg = parent.ensure_grad();
  for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i];
}

}  // namespace

template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, int stride, int pad) {
  const Shape xs = x.shape();
  const Shape ws = weight.shape();
  if (ws.c != xs.c || ws.h != ws.w) {
    throw InvalidArgument("conv2d: weight " + ws.str() + " does not fit input " + xs.str());
  }
  if (bias.defined() && bias.shape().size() != static_cast<std::size_t>(ws.n)) {
    throw InvalidArgument("conv2d: bias size does not match output channels");
  }
  const int k = ws.h;
  const int oh = (xs.h + 2 * pad - k) / stride + 1;
  const int ow = (xs.w + 2 * pad - k) / stride + 1;
  if (oh < 1 || ow < 1) throw InvalidArgument("conv2d: input " + xs.str() + " too small for kernel");
  const ConvGeom g{xs.c, xs.h, xs.w, k, stride, pad, oh, ow};
  const Shape os{xs.n, ws.n, oh, ow};
  auto out = make_result<T>(os, {&x, &weight, &bias});

  const std::size_t in_sz = static_cast<std::size_t>(xs.c) * xs.h * xs.w;
  const std::size_t out_sz = static_cast<std::size_t>(ws.n) * oh * ow;
  std::vector<T> col(g.identity() ? 0 : g.rows() * g.cols());
  ConstMapMat<T> wm(weight.value().data(), ws.n, static_cast<Eigen::Index>(g.rows()));
  for (int n = 0; n < xs.n; ++n) {
    const T* xn = x.value().data() + n * in_sz;
    if (!g.identity()) im2col(xn, g, col.data());
    ConstMapMat<T> cm(g.identity() ? xn : col.data(), static_cast<Eigen::Index>(g.rows()),
                      static_cast<Eigen::Index>(g.cols()));
    MapMat<T> om(out->value.data() + n * out_sz, ws.n, static_cast<Eigen::Index>(g.cols()));
    om.noalias() = wm * cm;
    if (bias.defined()) {
      for (int c = 0; c < ws.n; ++c) om.row(c).array() += bias.value()[c];
    }
  }

  if (out->requires_grad) {
    auto xn_ = x.node(), wn_ = weight.node(), bn_ = bias.defined() ? bias.node() : nullptr;
    out->backward = [xn_, wn_, bn_, g, xs, ws, in_sz, out_sz](Node<T>& self) {
      std::vector<T> col(g.identity() ? 0 : g.rows() * g.cols());
      std::vector<T> dcol(g.rows() * g.cols());
      ConstMapMat<T> wm(wn_->value.data(), ws.n, static_cast<Eigen::Index>(g.rows()));
      for (int n = 0; n < xs.n; ++n) {
        ConstMapMat<T> dout(self.grad.data() + n * out_sz, ws.n, static_cast<Eigen::Index>(g.cols()));
        if (wn_->requires_grad) {
          const T* xn = xn_->value.data() + n * in_sz;
          if (!g.identity()) im2col(xn, g, col.data());
          ConstMapMat<T> cm(g.identity() ? xn : col.data(), static_cast<Eigen::Index>(g.rows()),
                            static_cast<Eigen::Index>(g.cols()));
          MapMat<T> dw(wn_->ensure_grad().data(), ws.n, static_cast<Eigen::Index>(g.rows()));
          dw.noalias() += dout * cm.transpose();
        }
        if (bn_ && bn_->requires_grad) {
          auto& bg = bn_->ensure_grad();
          for (int c = 0; c < ws.n; ++c) bg[c] += dout.row(c).sum();
        }
        if (xn_->requires_grad) {
          T* dx = xn_->ensure_grad().data() + n * in_sz;
          if (g.identity()) {
            MapMat<T> dxm(dx, static_cast<Eigen::Index>(g.rows()), static_cast<Eigen::Index>(g.cols()));
            dxm.noalias() += wm.transpose() * dout;
          } else {
            MapMat<T> dcm(dcol.data(), static_cast<Eigen::Index>(g.rows()), static_cast<Eigen::Index>(g.cols()));
            dcm.noalias() = wm.transpose() * dout;
            col2im(dcol.data(), g, dx);
          }
        }
      }
    };
  }
  return Var<T>(out);
}

template <typename T>
Var<T> conv_transpose2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, int stride, int pad,
                        int output_pad) {
  const Shape xs = x.shape();
  const Shape ws = weight.shape();  // {in, out, k, k}
  if (ws.n != xs.c || ws.h != ws.w) {
    throw InvalidArgument("conv_transpose2d: weight " + ws.str() + " does not fit input " + xs.str());
  }
  if (output_pad >= stride) throw InvalidArgument("conv_transpose2d: output_pad must be < stride");
  const int k = ws.h;
  const int cout = ws.c;
  const int oh = (xs.h - 1) * stride - 2 * pad + k + output_pad;
  const int ow = (xs.w - 1) * stride - 2 * pad + k + output_pad;
  if (oh < 1 || ow < 1) throw InvalidArgument("conv_transpose2d: empty output");
  // The output image is the "input" side of the equivalent forward convolution.
  const ConvGeom g{cout, oh, ow, k, stride, pad, xs.h, xs.w};
  const Shape os{xs.n, cout, oh, ow};
  auto out = make_result<T>(os, {&x, &weight, &bias});

  const std::size_t in_sz = static_cast<std::size_t>(xs.c) * xs.h * xs.w;
  const std::size_t out_sz = static_cast<std::size_t>(cout) * oh * ow;
  const auto rows = static_cast<Eigen::Index>(g.rows());
  const auto cols = static_cast<Eigen::Index>(g.cols());
  std::vector<T> col(g.rows() * g.cols());
  ConstMapMat<T> wm(weight.value().data(), xs.c, rows);
  for (int n = 0; n < xs.n; ++n) {
    ConstMapMat<T> xm(x.value().data() + n * in_sz, xs.c, cols);
    MapMat<T> cm(col.data(), rows, cols);
    cm.noalias() = wm.transpose() * xm;
    T* on = out->value.data() + n * out_sz;
    col2im(col.data(), g, on);
    if (bias.defined()) {
      for (int c = 0; c < cout; ++c) {
        T* p = on + static_cast<std::size_t>(c) * oh * ow;
        for (std::size_t i = 0; i < static_cast<std::size_t>(oh) * ow; ++i) p[i] += bias.value()[c];
      }
    }
  }

  if (out->requires_grad) {
    auto xn_ = x.node(), wn_ = weight.node(), bn_ = bias.defined() ? bias.node() : nullptr;
    out->backward = [xn_, wn_, bn_, g, xs, cout, oh, ow, in_sz, out_sz, rows, cols](Node<T>& self) {
      std::vector<T> dcol(g.rows() * g.cols());
      ConstMapMat<T> wm(wn_->value.data(), xs.c, rows);
      for (int n = 0; n < xs.n; ++n) {
        const T* dout = self.grad.data() + n * out_sz;
        im2col(dout, g, dcol.data());
        ConstMapMat<T> dcm(dcol.data(), rows, cols);
        if (wn_->requires_grad) {
          ConstMapMat<T> xm(xn_->value.data() + n * in_sz, xs.c, cols);
          MapMat<T> dw(wn_->ensure_grad().data(), xs.c, rows);
          dw.noalias() += xm * dcm.transpose();
        }
        if (xn_->requires_grad) {
          MapMat<T> dx(xn_->ensure_grad().data() + n * in_sz, xs.c, cols);
          dx.noalias() += wm * dcm;
        }
        if (bn_ && bn_->requires_grad) {
          auto& bg = bn_->ensure_grad();
          for (int c = 0; c < cout; ++c) {
            const T* p = dout + static_cast<std::size_t>(c) * oh * ow;
            T s = 0;
            for (std::size_t i = 0; i < static_cast<std::size_t>(oh) * ow; ++i) s += p[i];
            bg[c] += s;
          }
        }
      }
    };
  }
  return Var<T>(out);
}

template <typename T>
Var<T> normalize(const Var<T>& x, NormMode mode, T eps) {
  const Shape s = x.shape();
  auto out = make_result<T>(s, {&x});
  const std::size_t plane = s.plane();
  const int groups = mode == NormMode::Batch ? s.c : s.n * s.c;
  const int blocks = mode == NormMode::Batch ? s.n : 1;  // contiguous planes per group
  // Offset of block b of group g.
  auto offset = [s, plane, mode](int g, int b) {
    return mode == NormMode::Batch ? (static_cast<std::size_t>(b) * s.c + g) * plane
                                   : static_cast<std::size_t>(g) * plane;
  };
  const double count = static_cast<double>(plane) * blocks;
  std::vector<T> inv_std(groups);
  const T* xv = x.value().data();
  T* yv = out->value.data();
  for (int g = 0; g < groups; ++g) {
    double mean = 0.0;
    for (int b = 0; b < blocks; ++b) {
      const T* p = xv + offset(g, b);
      for (std::size_t i = 0; i < plane; ++i) mean += p[i];
    }
    mean /= count;
    double var = 0.0;
    for (int b = 0; b < blocks; ++b) {
      const T* p = xv + offset(g, b);
      for (std::size_t i = 0; i < plane; ++i) {
        const double d = p[i] - mean;
        var += d * d;
      }
    }
    var /= count;
    const T is = static_cast<T>(1.0 / std::sqrt(var + static_cast<double>(eps)));
    inv_std[g] = is;
    const T m = static_cast<T>(mean);
    for (int b = 0; b < blocks; ++b) {
      const T* p = xv + offset(g, b);
      T* q = yv + offset(g, b);
      for (std::size_t i = 0; i < plane; ++i) q[i] = (p[i] - m) * is;
    }
  }

  if (out->requires_grad) {
    auto xn_ = x.node();
    out->backward = [xn_, inv_std = std::move(inv_std), groups, blocks, plane, count, offset](Node<T>& self) {
      auto& dx = xn_->ensure_grad();
      const T* y = self.value.data();
      const T* dy = self.grad.data();
      for (int g = 0; g < groups; ++g) {
        double sum_dy = 0.0, sum_dy_y = 0.0;
        for (int b = 0; b < blocks; ++b) {
          const std::size_t o = offset(g, b);
          for (std::size_t i = 0; i < plane; ++i) {
            sum_dy += dy[o + i];
            sum_dy_y += static_cast<double>(dy[o + i]) * y[o + i];
          }
        }
        const T mean_dy = static_cast<T>(sum_dy / count);
        const T mean_dy_y = static_cast<T>(sum_dy_y / count);
        const T is = inv_std[g];
        for (int b = 0; b < blocks; ++b) {
          const std::size_t o = offset(g, b);
          for (std::size_t i = 0; i < plane; ++i) dx[o + i] += is * (dy[o + i] - mean_dy - y[o + i] * mean_dy_y);
        }
      }
    };
  }
  return Var<T>(out);
}

template <typename T>
Var<T> modulate(const Var<T>& x_hat, const Var<T>& gamma, const Var<T>& beta) {
  require_same_shape(x_hat, gamma, "modulate");
  require_same_shape(x_hat, beta, "modulate");
  auto out = make_result<T>(x_hat.shape(), {&x_hat, &gamma, &beta});
  const auto xv = x_hat.value(), gv = gamma.value(), bv = beta.value();
  for (std::size_t i = 0; i < xv.size(); ++i) out->value[i] = xv[i] * (T(1) + gv[i]) + bv[i];
  if (out->requires_grad) {
    auto xn_ = x_hat.node(), gn_ = gamma.node(), bn_ = beta.node();
    out->backward = [xn_, gn_, bn_](Node<T>& self) {
      const auto& dy = self.grad;
      if (xn_->requires_grad) {
        auto& d = xn_->ensure_grad();
        for (std::size_t i = 0; i < dy.size(); ++i) d[i] += dy[i] * (T(1) + gn_->value[i]);
      }
      if (gn_->requires_grad) {
        auto& d = gn_->ensure_grad();
        for (std::size_t i = 0; i < dy.size(); ++i) d[i] += dy[i] * xn_->value[i];
      }
      if (bn_->requires_grad) accumulate(*bn_, dy);
    };
  }
  return Var<T>(out);
}

namespace {

// Pointwise op whose derivative is a function of (input, output).
template <typename T, typename F, typename D>
Var<T> pointwise(const Var<T>& x, F f, D dfdx) {
  auto out = make_result<T>(x.shape(), {&x});
  const auto xv = x.value();
  for (std::size_t i = 0; i < xv.size(); ++i) out->value[i] = f(xv[i]);
  if (out->requires_grad) {
    auto xn_ = x.node();
    out->backward = [xn_, dfdx](Node<T>& self) {
      auto& d = xn_->ensure_grad();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += self.grad[i] * dfdx(xn_->value[i], self.value[i]);
    };
  }
  return Var<T>(out);
}

}  // namespace

template <typename T>
Var<T> relu(const Var<T>& x) {
  return pointwise(
      x, [](T v) { return v <= T(0) ? T(0) : v; },  // keeps NaN
      [](T v, T) { return v > T(0) ? T(1) : T(0); });
}

template <typename T>
Var<T> leaky_relu(const Var<T>& x, T slope) {
  return pointwise(
      x, [slope](T v) { return v > T(0) ? v : slope * v; }, [slope](T v, T) { return v > T(0) ? T(1) : slope; });
}

template <typename T>
Var<T> tanh(const Var<T>& x) {
  return pointwise(
      x, [](T v) { return std::tanh(v); }, [](T, T y) { return T(1) - y * y; });
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  require_same_shape(a, b, "add");
  auto out = make_result<T>(a.shape(), {&a, &b});
  const auto av = a.value(), bv = b.value();
  for (std::size_t i = 0; i < av.size(); ++i) out->value[i] = av[i] + bv[i];
  if (out->requires_grad) {
    auto an_ = a.node(), bn_ = b.node();
    out->backward = [an_, bn_](Node<T>& self) {
      if (an_->requires_grad) accumulate(*an_, self.grad);
      if (bn_->requires_grad) accumulate(*bn_, self.grad);
    };
  }
  return Var<T>(out);
}

template <typename T>
Var<T> resize_nearest(const Var<T>& x, int height, int width) {
  const Shape s = x.shape();
  if (height < 1 || width < 1) throw InvalidArgument("resize_nearest: empty target");
  const Shape os{s.n, s.c, height, width};
  std::vector<std::size_t> src(static_cast<std::size_t>(height) * width);
  for (int y = 0; y < height; ++y) {
    const auto sy = static_cast<std::size_t>(static_cast<long long>(y) * s.h / height);
    for (int xx = 0; xx < width; ++xx) {
      const auto sx = static_cast<std::size_t>(static_cast<long long>(xx) * s.w / width);
      src[static_cast<std::size_t>(y) * width + xx] = sy * s.w + sx;
    }
  }
  auto out = make_result<T>(os, {&x});
  const std::size_t in_plane = s.plane(), out_plane = os.plane();
  const std::size_t planes = static_cast<std::size_t>(s.n) * s.c;
  for (std::size_t p = 0; p < planes; ++p) {
    const T* in = x.value().data() + p * in_plane;
    T* o = out->value.data() + p * out_plane;
    for (std::size_t i = 0; i < out_plane; ++i) o[i] = in[src[i]];
  }
  if (out->requires_grad) {
    auto xn_ = x.node();
    out->backward = [xn_, src = std::move(src), planes, in_plane, out_plane](Node<T>& self) {
      auto& d = xn_->ensure_grad();
      for (std::size_t p = 0; p < planes; ++p) {
        for (std::size_t i = 0; i < out_plane; ++i) d[p * in_plane + src[i]] += self.grad[p * out_plane + i];
      }
    };
  }
  return Var<T>(out);
}

template <typename T>
Var<T> avg_pool2(const Var<T>& x) {
  const Shape s = x.shape();
  if (s.h < 2 || s.w < 2) throw InvalidArgument("avg_pool2: input " + s.str() + " too small");
  const Shape os{s.n, s.c, s.h / 2, s.w / 2};
  auto out = make_result<T>(os, {&x});
  const std::size_t planes = static_cast<std::size_t>(s.n) * s.c;
  for (std::size_t p = 0; p < planes; ++p) {
    const T* in = x.value().data() + p * s.plane();
    T* o = out->value.data() + p * os.plane();
    for (int y = 0; y < os.h; ++y) {
      for (int xx = 0; xx < os.w; ++xx) {
        const T* a = in + static_cast<std::size_t>(2 * y) * s.w + 2 * xx;
        o[static_cast<std::size_t>(y) * os.w + xx] = (a[0] + a[1] + a[s.w] + a[s.w + 1]) * T(0.25);
      }
    }
  }
  if (out->requires_grad) {
    auto xn_ = x.node();
    out->backward = [xn_, s, os, planes](Node<T>& self) {
      auto& d = xn_->ensure_grad();
      for (std::size_t p = 0; p < planes; ++p) {
        T* a0 = d.data() + p * s.plane();
        const T* g = self.grad.data() + p * os.plane();
        for (int y = 0; y < os.h; ++y) {
          for (int xx = 0; xx < os.w; ++xx) {
            const T v = g[static_cast<std::size_t>(y) * os.w + xx] * T(0.25);
            T* a = a0 + static_cast<std::size_t>(2 * y) * s.w + 2 * xx;
            a[0] += v;
            a[1] += v;
            a[s.w] += v;
            a[s.w + 1] += v;
          }
        }
      }
    };
  }
  return Var<T>(out);
}

template <typename T>
Var<T> concat_channels(const Var<T>& a, const Var<T>& b) {
  const Shape sa = a.shape(), sb = b.shape();
  if (sa.n != sb.n || sa.h != sb.h || sa.w != sb.w) {
    throw InvalidArgument("concat_channels: misaligned inputs " + sa.str() + " and " + sb.str());
  }
  const Shape os{sa.n, sa.c + sb.c, sa.h, sa.w};
  auto out = make_result<T>(os, {&a, &b});
  const std::size_t na = static_cast<std::size_t>(sa.c) * sa.h * sa.w;
  const std::size_t nb = static_cast<std::size_t>(sb.c) * sb.h * sb.w;
  for (int n = 0; n < sa.n; ++n) {
    std::copy_n(a.value().data() + n * na, na, out->value.data() + n * (na + nb));
    std::copy_n(b.value().data() + n * nb, nb, out->value.data() + n * (na + nb) + na);
  }
  if (out->requires_grad) {
    auto an_ = a.node(), bn_ = b.node();
    out->backward = [an_, bn_, na, nb, batch = sa.n](Node<T>& self) {
      for (int n = 0; n < batch; ++n) {
        const T* g = self.grad.data() + n * (na + nb);
        if (an_->requires_grad) {
          T* d = an_->ensure_grad().data() + n * na;
          for (std::size_t i = 0; i < na; ++i) d[i] += g[i];
        }
        if (bn_->requires_grad) {
          T* d = bn_->ensure_grad().data() + n * nb;
          for (std::size_t i = 0; i < nb; ++i) d[i] += g[na + i];
        }
      }
    };
  }
  return Var<T>(out);
}

template <typename T>
Var<T> sum(const Var<T>& x) {
  auto out = make_result<T>(Shape{}, {&x});
  double s = 0.0;
  for (T v : x.value()) s += v;
  out->value[0] = static_cast<T>(s);
  if (out->requires_grad) {
    auto xn_ = x.node();
    out->backward = [xn_](Node<T>& self) {
      auto& d = xn_->ensure_grad();
      for (auto& v : d) v += self.grad[0];
    };
  }
  return Var<T>(out);
}

template <typename T>
Var<T> l1_loss(const Var<T>& pred, const Var<T>& target) {
  require_same_shape(pred, target, "l1_loss");
  auto out = make_result<T>(Shape{}, {&pred, &target});
  const auto pv = pred.value(), tv = target.value();
  double s = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) s += std::abs(static_cast<double>(pv[i]) - static_cast<double>(tv[i]));
  const double count = static_cast<double>(pv.size());
  out->value[0] = static_cast<T>(s / count);
  if (out->requires_grad) {
    auto pn_ = pred.node(), tn_ = target.node();
    out->backward = [pn_, tn_, count](Node<T>& self) {
      const T scale = static_cast<T>(self.grad[0] / count);
      const auto& p = pn_->value;
      const auto& t = tn_->value;
      auto sign = [](T d) { return d > T(0) ? T(1) : (d < T(0) ? T(-1) : T(0)); };
      if (pn_->requires_grad) {
        auto& d = pn_->ensure_grad();
        for (std::size_t i = 0; i < p.size(); ++i) d[i] += scale * sign(p[i] - t[i]);
      }
      if (tn_->requires_grad) {
        auto& d = tn_->ensure_grad();
        for (std::size_t i = 0; i < p.size(); ++i) d[i] -= scale * sign(p[i] - t[i]);
      }
    };
  }
  return Var<T>(out);
}

template <typename T>
Var<T> weighted_sum(const std::vector<Var<T>>& scalars, const std::vector<T>& weights) {
  if (scalars.size() != weights.size() || scalars.empty()) throw InvalidArgument("weighted_sum: bad arity");
  auto out = std::make_shared<Node<T>>();
  out->shape = Shape{};
  out->value.assign(1, T(0));
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    if (scalars[i].shape().size() != 1) throw InvalidArgument("weighted_sum: operands must be scalars");
    out->value[0] += weights[i] * scalars[i].item();
    if (grad_enabled() && scalars[i].requires_grad()) {
      out->requires_grad = true;
      out->parents.push_back(scalars[i].node());
    }
  }
  if (out->requires_grad) {
    std::vector<std::pair<std::shared_ptr<Node<T>>, T>> terms;
    for (std::size_t i = 0; i < scalars.size(); ++i) {
      if (scalars[i].requires_grad()) terms.emplace_back(scalars[i].node(), weights[i]);
    }
    out->backward = [terms = std::move(terms)](Node<T>& self) {
      for (const auto& [n, w] : terms) n->ensure_grad()[0] += w * self.grad[0];
    };
  }
  return Var<T>(out);
}

#define SAR2RGB_INSTANTIATE_OPS(T)                                                                \
  template Var<T> conv2d(const Var<T>&, const Var<T>&, const Var<T>&, int, int);                 \
  template Var<T> conv_transpose2d(const Var<T>&, const Var<T>&, const Var<T>&, int, int, int);  \
  template Var<T> normalize(const Var<T>&, NormMode, T);                                          \
  template Var<T> modulate(const Var<T>&, const Var<T>&, const Var<T>&);                          \
  template Var<T> relu(const Var<T>&);                                                            \
  template Var<T> leaky_relu(const Var<T>&, T);                                                   \
  template Var<T> tanh(const Var<T>&);                                                            \
  template Var<T> add(const Var<T>&, const Var<T>&);                                              \
  template Var<T> resize_nearest(const Var<T>&, int, int);                                        \
  template Var<T> avg_pool2(const Var<T>&);                                                       \
  template Var<T> concat_channels(const Var<T>&, const Var<T>&);                                  \
  template Var<T> sum(const Var<T>&);                                                             \
  template Var<T> l1_loss(const Var<T>&, const Var<T>&);                                          \
  template Var<T> weighted_sum(const std::vector<Var<T>>&, const std::vector<T>&);

SAR2RGB_INSTANTIATE_OPS(float)
SAR2RGB_INSTANTIATE_OPS(double)

}  // namespace sar2rgb::nn
