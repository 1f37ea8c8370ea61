#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "sedge/error.hpp"
#include "sedge/tensor.hpp"

namespace sedge {

struct ConvSpec {
  int stride = 1;
  int dilation = 1;
  int groups = 1;
  int pad = 0;
};

inline int conv_out_extent(int in, int k, const ConvSpec& s) {
  int eff = s.dilation * (k - 1) + 1;
  return (in + 2 * s.pad - eff) / s.stride + 1;
}

// "same" padding for odd kernels at stride 1: output extent equals input.
inline int same_pad(int k, int dilation) { return dilation * (k - 1) / 2; }

namespace detail {

template <typename T>
using MatRM =
    Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapM = Eigen::Map<MatRM<T>>;
template <typename T>
using MapCM = Eigen::Map<const MatRM<T>>;

// Unpacks the patch matrix for one (batch, group) slice:
// rows = cg*kh*kw, cols = oh*ow. Out-of-image taps contribute zeros.
template <typename T>
void im2col(const TensorT<T>& x, int in, int c0, int cg, int kh, int kw,
            const ConvSpec& s, int oh, int ow, T* col) {
  const int h = x.h, w = x.w;
  for (int ic = 0; ic < cg; ++ic) {
    const T* src = x.plane(in, c0 + ic);
    for (int ki = 0; ki < kh; ++ki) {
      for (int kj = 0; kj < kw; ++kj) {
        T* dst = col + ((static_cast<std::size_t>(ic) * kh + ki) * kw + kj) *
                           (static_cast<std::size_t>(oh) * ow);
        for (int oy = 0; oy < oh; ++oy) {
          int iy = oy * s.stride - s.pad + ki * s.dilation;
          T* row = dst + static_cast<std::size_t>(oy) * ow;
          if (iy < 0 || iy >= h) {
            for (int ox = 0; ox < ow; ++ox) row[ox] = T(0);
            continue;
          }
          const T* srow = src + static_cast<std::size_t>(iy) * w;
          for (int ox = 0; ox < ow; ++ox) {
            int ix = ox * s.stride - s.pad + kj * s.dilation;
            row[ox] = (ix >= 0 && ix < w) ? srow[ix] : T(0);
          }
        }
      }
    }
  }
}

// Scatter-adds a patch matrix back into the image (adjoint of im2col).
template <typename T>
void col2im_add(const T* col, int in, int c0, int cg, int kh, int kw,
                const ConvSpec& s, int oh, int ow, TensorT<T>& gx) {
  const int h = gx.h, w = gx.w;
  for (int ic = 0; ic < cg; ++ic) {
    T* dst = gx.plane(in, c0 + ic);
    for (int ki = 0; ki < kh; ++ki) {
      for (int kj = 0; kj < kw; ++kj) {
        const T* srcrow =
            col + ((static_cast<std::size_t>(ic) * kh + ki) * kw + kj) *
                      (static_cast<std::size_t>(oh) * ow);
        for (int oy = 0; oy < oh; ++oy) {
          int iy = oy * s.stride - s.pad + ki * s.dilation;
          if (iy < 0 || iy >= h) continue;
          const T* row = srcrow + static_cast<std::size_t>(oy) * ow;
          T* drow = dst + static_cast<std::size_t>(iy) * w;
          for (int ox = 0; ox < ow; ++ox) {
            int ix = ox * s.stride - s.pad + kj * s.dilation;
            if (ix >= 0 && ix < w) drow[ix] += row[ox];
          }
        }
      }
    }
  }
}

template <typename T>
void check_conv_args(const TensorT<T>& x, const TensorT<T>& weight,
                     const ConvSpec& s) {
  check_config(s.groups >= 1 && s.stride >= 1 && s.dilation >= 1 && s.pad >= 0,
               "conv2d: bad stride/dilation/groups/pad");
  check_config(x.c % s.groups == 0,
               "conv2d: input channels not divisible by groups");
  check_config(weight.n % s.groups == 0,
               "conv2d: output channels not divisible by groups");
  check_config(weight.c == x.c / s.groups,
               "conv2d: weight shape " + weight.shape_str() +
                   " inconsistent with input " + x.shape_str());
}

}  // namespace detail

// Grouped 2-D convolution. x is (n, ci, h, w); weight is (co, ci/groups,
// kh, kw); bias, when non-null, is (1, co, 1, 1). Output channel o in group
// g reads only the input channels of group g.
template <typename T>
TensorT<T> conv2d_forward(const TensorT<T>& x, const TensorT<T>& weight,
                          const TensorT<T>* bias, const ConvSpec& s) {
  detail::check_conv_args(x, weight, s);
  const int kh = weight.h, kw = weight.w;
  const int oh = conv_out_extent(x.h, kh, s);
  const int ow = conv_out_extent(x.w, kw, s);
  check_config(oh >= 1 && ow >= 1, "conv2d: output would be empty for input " +
                                       x.shape_str());
  if (bias)
    check_config(bias->c == weight.n && bias->size() == size_t(weight.n),
                 "conv2d: bias shape mismatch");

  const int cg = x.c / s.groups;       // input channels per group
  const int og = weight.n / s.groups;  // output channels per group
  const std::size_t ohw = static_cast<std::size_t>(oh) * ow;
  const std::size_t krows = static_cast<std::size_t>(cg) * kh * kw;

  TensorT<T> out(x.n, weight.n, oh, ow);
  std::vector<T> col(krows * ohw);
  for (int in = 0; in < x.n; ++in) {
    for (int g = 0; g < s.groups; ++g) {
      detail::im2col(x, in, g * cg, cg, kh, kw, s, oh, ow, col.data());
      detail::MapCM<T> wmat(weight.data.data() + static_cast<std::size_t>(g) *
                                                     og * krows,
                            og, krows);
      detail::MapCM<T> cmat(col.data(), krows, ohw);
      detail::MapM<T> omat(out.plane(in, g * og), og, ohw);
      omat.noalias() = wmat * cmat;
    }
    if (bias) {
      for (int oc = 0; oc < weight.n; ++oc) {
        T b = bias->data[oc];
        T* p = out.plane(in, oc);
        for (std::size_t i = 0; i < ohw; ++i) p[i] += b;
      }
    }
  }
  return out;
}

// Backward pass. Accumulates (+=) into any non-null gradient output, so a
// caller can run several backward passes against the same parameter grads.
template <typename T>
void conv2d_backward(const TensorT<T>& x, const TensorT<T>& weight,
                     const ConvSpec& s, const TensorT<T>& gout,
                     TensorT<T>* gx, TensorT<T>* gweight, TensorT<T>* gbias) {
  detail::check_conv_args(x, weight, s);
  const int kh = weight.h, kw = weight.w;
  const int oh = conv_out_extent(x.h, kh, s);
  const int ow = conv_out_extent(x.w, kw, s);
  check_config(gout.n == x.n && gout.c == weight.n && gout.h == oh &&
                   gout.w == ow,
               "conv2d backward: grad shape mismatch");
  const int cg = x.c / s.groups;
  const int og = weight.n / s.groups;
  const std::size_t ohw = static_cast<std::size_t>(oh) * ow;
  const std::size_t krows = static_cast<std::size_t>(cg) * kh * kw;

  if (gx) check_config(gx->same_shape(x), "conv2d backward: gx shape");
  if (gweight)
    check_config(gweight->same_shape(weight), "conv2d backward: gw shape");

  std::vector<T> col(krows * ohw);
  std::vector<T> colg(gx ? krows * ohw : 0);
  for (int in = 0; in < x.n; ++in) {
    for (int g = 0; g < s.groups; ++g) {
      detail::MapCM<T> gmat(gout.plane(in, g * og), og, ohw);
      detail::MapCM<T> wmat(weight.data.data() + static_cast<std::size_t>(g) *
                                                     og * krows,
                            og, krows);
      if (gweight || gx)
        detail::im2col(x, in, g * cg, cg, kh, kw, s, oh, ow, col.data());
      if (gweight) {
        detail::MapCM<T> cmat(col.data(), krows, ohw);
        detail::MapM<T> gw(gweight->data.data() +
                               static_cast<std::size_t>(g) * og * krows,
                           og, krows);
        gw.noalias() += gmat * cmat.transpose();
      }
      if (gx) {
        detail::MapM<T> cg_mat(colg.data(), krows, ohw);
        cg_mat.noalias() = wmat.transpose() * gmat;
        detail::col2im_add(colg.data(), in, g * cg, cg, kh, kw, s, oh, ow,
                           *gx);
      }
    }
    if (gbias) {
      for (int oc = 0; oc < weight.n; ++oc) {
        const T* p = gout.plane(in, oc);
        T acc(0);
        for (std::size_t i = 0; i < ohw; ++i) acc += p[i];
        gbias->data[oc] += acc;
      }
    }
  }
}

template <typename T>
TensorT<T> relu_forward(const TensorT<T>& x) {
  TensorT<T> out = x;
  for (T& v : out.data)
    if (v < T(0)) v = T(0);
  return out;
}

template <typename T>
void relu_backward(const TensorT<T>& x, const TensorT<T>& gout,
                   TensorT<T>& gx) {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x.data[i] > T(0)) gx.data[i] += gout.data[i];
}

// Numerically stable logistic; saturates cleanly for large |x|.
template <typename T>
T sigmoid_scalar(T x) {
  if (x >= T(0)) {
    return T(1) / (T(1) + std::exp(-x));
  }
  T e = std::exp(x);
  return e / (T(1) + e);
}

template <typename T>
TensorT<T> sigmoid_forward(const TensorT<T>& x) {
  TensorT<T> out = x;
  for (T& v : out.data) v = sigmoid_scalar(v);
  return out;
}

template <typename T>
void sigmoid_backward(const TensorT<T>& y, const TensorT<T>& gout,
                      TensorT<T>& gx) {
  for (std::size_t i = 0; i < y.size(); ++i)
    gx.data[i] += gout.data[i] * y.data[i] * (T(1) - y.data[i]);
}

template <typename T>
TensorT<T> add_forward(const TensorT<T>& a, const TensorT<T>& b) {
  check_config(a.same_shape(b), "add: shape mismatch " + a.shape_str() +
                                    " vs " + b.shape_str());
  TensorT<T> out = a;
  for (std::size_t i = 0; i < b.size(); ++i) out.data[i] += b.data[i];
  return out;
}

// One output channel's source: (input index, channel within that input).
struct ChannelRef {
  int input = 0;
  int channel = 0;
};

// Channel-wise gather across inputs. The layout may reference a source
// channel more than once (replication); backward accumulates accordingly.
template <typename T>
TensorT<T> concat_channels_forward(const std::vector<const TensorT<T>*>& xs,
                                   const std::vector<ChannelRef>& layout) {
  check_config(!xs.empty(), "concat: no inputs");
  const int n = xs[0]->n, h = xs[0]->h, w = xs[0]->w;
  for (const auto* x : xs)
    check_config(x->n == n && x->h == h && x->w == w,
                 "concat: spatial/batch mismatch");
  TensorT<T> out(n, static_cast<int>(layout.size()), h, w);
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (int in = 0; in < n; ++in) {
    for (std::size_t oc = 0; oc < layout.size(); ++oc) {
      const ChannelRef& r = layout[oc];
      check_config(r.input >= 0 && r.input < static_cast<int>(xs.size()) &&
                       r.channel >= 0 && r.channel < xs[r.input]->c,
                   "concat: layout entry out of range");
      const T* src = xs[r.input]->plane(in, r.channel);
      T* dst = out.plane(in, static_cast<int>(oc));
      std::copy(src, src + plane, dst);
    }
  }
  return out;
}

template <typename T>
void concat_channels_backward(const TensorT<T>& gout,
                              const std::vector<ChannelRef>& layout,
                              const std::vector<TensorT<T>*>& gxs) {
  const std::size_t plane = static_cast<std::size_t>(gout.h) * gout.w;
  for (int in = 0; in < gout.n; ++in) {
    for (std::size_t oc = 0; oc < layout.size(); ++oc) {
      const ChannelRef& r = layout[oc];
      const T* src = gout.plane(in, static_cast<int>(oc));
      T* dst = gxs[r.input]->plane(in, r.channel);
      for (std::size_t i = 0; i < plane; ++i) dst[i] += src[i];
    }
  }
}

// Permutation layout over the flat channel space of the inputs in list
// order: perm[out_channel] = flat source channel. Must be a bijection.
template <typename T>
std::vector<ChannelRef> permutation_layout(
    const std::vector<const TensorT<T>*>& xs, const std::vector<int>& perm) {
  int total = 0;
  for (const auto* x : xs) total += x->c;
  check_config(static_cast<int>(perm.size()) == total,
               "concat permutation: size must equal total channels");
  std::vector<char> seen(total, 0);
  std::vector<ChannelRef> layout(perm.size());
  for (std::size_t oc = 0; oc < perm.size(); ++oc) {
    int flat = perm[oc];
    check_config(flat >= 0 && flat < total && !seen[flat],
                 "concat permutation: not a bijection");
    seen[flat] = 1;
    int input = 0;
    while (flat >= xs[input]->c) flat -= xs[input++]->c;
    layout[oc] = {input, flat};
  }
  return layout;
}

// --- Fixed-kernel bilinear upsampling (grouped transposed convolution) ---

// 1-D interpolation kernel of length 2*factor; rows of the 2-D kernel are
// the outer product. Taps sum to the factor, so interior outputs preserve
// constants; borders see truncated support (zero padding outside).
inline std::vector<double> bilinear_kernel_1d(int factor) {
  int size = 2 * factor;
  double center = factor - 0.5;
  std::vector<double> k(size);
  for (int i = 0; i < size; ++i)
    k[i] = 1.0 - std::abs(i - center) / factor;
  return k;
}

template <typename T>
TensorT<T> upsample_bilinear_forward(const TensorT<T>& x, int factor) {
  check_config(factor == 1 || factor == 2 || factor == 4 || factor == 8,
               "upsample: factor must be one of 1,2,4,8");
  if (factor == 1) return x;
  const std::vector<double> k1 = bilinear_kernel_1d(factor);
  const int ks = static_cast<int>(k1.size());
  const int pad = factor / 2;
  TensorT<T> out(x.n, x.c, x.h * factor, x.w * factor);
  for (int in = 0; in < x.n; ++in) {
    for (int ic = 0; ic < x.c; ++ic) {
      const T* src = x.plane(in, ic);
      T* dst = out.plane(in, ic);
      for (int iy = 0; iy < x.h; ++iy) {
        for (int ix = 0; ix < x.w; ++ix) {
          T v = src[static_cast<std::size_t>(iy) * x.w + ix];
          if (v == T(0)) continue;
          for (int ki = 0; ki < ks; ++ki) {
            int oy = iy * factor - pad + ki;
            if (oy < 0 || oy >= out.h) continue;
            T vk = v * static_cast<T>(k1[ki]);
            T* drow = dst + static_cast<std::size_t>(oy) * out.w;
            for (int kj = 0; kj < ks; ++kj) {
              int ox = ix * factor - pad + kj;
              if (ox >= 0 && ox < out.w)
                drow[ox] += vk * static_cast<T>(k1[kj]);
            }
          }
        }
      }
    }
  }
  return out;
}

template <typename T>
void upsample_bilinear_backward(const TensorT<T>& gout, int factor,
                                TensorT<T>& gx) {
  if (factor == 1) {
    for (std::size_t i = 0; i < gout.size(); ++i) gx.data[i] += gout.data[i];
    return;
  }
  const std::vector<double> k1 = bilinear_kernel_1d(factor);
  const int ks = static_cast<int>(k1.size());
  const int pad = factor / 2;
  for (int in = 0; in < gx.n; ++in) {
    for (int ic = 0; ic < gx.c; ++ic) {
      const T* src = gout.plane(in, ic);
      T* dst = gx.plane(in, ic);
      for (int iy = 0; iy < gx.h; ++iy) {
        for (int ix = 0; ix < gx.w; ++ix) {
          T acc(0);
          for (int ki = 0; ki < ks; ++ki) {
            int oy = iy * factor - pad + ki;
            if (oy < 0 || oy >= gout.h) continue;
            const T* srow = src + static_cast<std::size_t>(oy) * gout.w;
            T rowacc(0);
            for (int kj = 0; kj < ks; ++kj) {
              int ox = ix * factor - pad + kj;
              if (ox >= 0 && ox < gout.w)
                rowacc += srow[ox] * static_cast<T>(k1[kj]);
            }
            acc += rowacc * static_cast<T>(k1[ki]);
          }
          dst[static_cast<std::size_t>(iy) * gx.w + ix] += acc;
        }
      }
    }
  }
}

}  // namespace sedge
