#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sedge/error.hpp"

namespace sedge {

// Dense rank-4 (batch, channel, height, width) array, row-major with the
// width index fastest. The float instantiation is the working precision of
// the whole library; the double instantiation exists only for the
// high-precision forward path used by gradient-check tests.
template <typename T>
struct TensorT {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<T> data;

  TensorT() = default;
  TensorT(int n_, int c_, int h_, int w_)
      : n(n_), c(c_), h(h_), w(w_), data(numel(n_, c_, h_, w_), T(0)) {
    check_config(n_ >= 0 && c_ >= 0 && h_ >= 0 && w_ >= 0,
                 "tensor dims must be nonnegative");
  }

  static std::size_t numel(int n, int c, int h, int w) {
    return static_cast<std::size_t>(n) * c * h * w;
  }

  std::size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }

  bool same_shape(const TensorT& o) const {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }

  std::string shape_str() const {
    return "(" + std::to_string(n) + "," + std::to_string(c) + "," +
           std::to_string(h) + "," + std::to_string(w) + ")";
  }

  std::size_t index(int in, int ic, int ih, int iw) const {
    return ((static_cast<std::size_t>(in) * c + ic) * h + ih) * w + iw;
  }

  T& at(int in, int ic, int ih, int iw) { return data[index(in, ic, ih, iw)]; }
  T at(int in, int ic, int ih, int iw) const {
    return data[index(in, ic, ih, iw)];
  }

  T* plane(int in, int ic) { return data.data() + index(in, ic, 0, 0); }
  const T* plane(int in, int ic) const {
    return data.data() + index(in, ic, 0, 0);
  }

  void fill(T v) { std::fill(data.begin(), data.end(), v); }
  void zero() { fill(T(0)); }

  TensorT zeros_like() const { return TensorT(n, c, h, w); }

  bool all_finite() const {
    for (T v : data)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }
};

using Tensor = TensorT<float>;

template <typename T>
TensorT<T> to_precision(const Tensor& x) {
  TensorT<T> out(x.n, x.c, x.h, x.w);
  for (std::size_t i = 0; i < x.size(); ++i)
    out.data[i] = static_cast<T>(x.data[i]);
  return out;
}

}  // namespace sedge
