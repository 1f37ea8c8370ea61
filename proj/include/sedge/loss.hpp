#pragma once

#include <cmath>

#include "sedge/labels.hpp"
#include "sedge/tensor.hpp"

namespace sedge {

// A scalar loss with its gradient w.r.t. the pre-sigmoid activations. The
// scalar is accumulated in double regardless of the activation precision.
template <typename T>
struct LossGradT {
  double value = 0.0;
  TensorT<T> grad;
};

using LossGrad = LossGradT<float>;

// Fraction of non-edge entries over all K maps of the image: one beta per
// image, shared across classes.
double compute_beta(const EdgeLabelStack& gt);
double compute_beta_binary(const BinaryMap& gt_any);
// Fraction of non-edge pixels (label 0) of a multi-class edge label map.
double compute_beta_multiclass(const SegMap& gt_labels);

namespace detail {

template <typename T>
inline double softplus(T x) {
  double xd = static_cast<double>(x);
  if (xd > 0) return xd + std::log1p(std::exp(-xd));
  return std::log1p(std::exp(xd));
}

template <typename T>
inline double sigmoid_d(T x) {
  double xd = static_cast<double>(x);
  if (xd >= 0) return 1.0 / (1.0 + std::exp(-xd));
  double e = std::exp(xd);
  return e / (1.0 + e);
}

// One entry of the reweighted sigmoid cross entropy in its fused stable
// form; never evaluates log of a sigmoid output. Returns the entry loss
// and writes the gradient: beta*(Y-1) on edges, (1-beta)*Y off edges.
template <typename T>
inline double fused_bce_entry(T x, bool edge, double beta, T* grad) {
  double y = sigmoid_d(x);
  if (edge) {
    *grad = static_cast<T>(beta * (y - 1.0));
    return beta * softplus(-x);
  }
  *grad = static_cast<T>((1.0 - beta) * y);
  return (1.0 - beta) * softplus(x);
}

}  // namespace detail

// Eq.-style multi-label loss, summed over classes and pixels:
//   -beta * Ybar * log Y - (1-beta) * (1-Ybar) * log(1-Y),  Y = sigmoid(A).
template <typename T>
LossGradT<T> multilabel_loss(const TensorT<T>& act, const EdgeLabelStack& gt,
                             double beta) {
  check_config(act.n == 1 && act.c == gt.k && act.h == gt.h && act.w == gt.w,
               "multilabel loss: activation " + act.shape_str() +
                   " does not match labels");
  LossGradT<T> out;
  out.grad = act.zeros_like();
  for (std::size_t i = 0; i < act.size(); ++i)
    out.value += detail::fused_bce_entry(act.data[i], gt.data[i] != 0, beta,
                                         &out.grad.data[i]);
  if (!std::isfinite(out.value))
    throw NumericError("multilabel loss: non-finite activations");
  return out;
}

// The same loss with K = 1 on the OR-collapsed ground truth.
template <typename T>
LossGradT<T> binary_edge_loss(const TensorT<T>& act, const BinaryMap& gt_any,
                              double beta) {
  check_config(act.n == 1 && act.c == 1 && act.h == gt_any.h &&
                   act.w == gt_any.w,
               "binary edge loss: activation " + act.shape_str() +
                   " does not match labels");
  LossGradT<T> out;
  out.grad = act.zeros_like();
  for (std::size_t i = 0; i < act.size(); ++i)
    out.value += detail::fused_bce_entry(act.data[i], gt_any.v[i] != 0, beta,
                                         &out.grad.data[i]);
  if (!std::isfinite(out.value))
    throw NumericError("binary edge loss: non-finite activations");
  return out;
}

// Multi-class baseline: softmax cross entropy over K+1 channels (label 0 =
// non-edge) with the edge terms weighted beta and the background term
// weighted 1-beta, the same skew correction as the multi-label loss.
template <typename T>
LossGradT<T> reweighted_softmax_loss(const TensorT<T>& act,
                                     const SegMap& gt_labels, double beta) {
  check_config(act.n == 1 && act.c >= 2 && act.h == gt_labels.h &&
                   act.w == gt_labels.w,
               "softmax loss: activation " + act.shape_str() +
                   " does not match labels");
  const int nc = act.c;
  LossGradT<T> out;
  out.grad = act.zeros_like();
  const std::size_t plane = static_cast<std::size_t>(act.h) * act.w;
  for (std::size_t i = 0; i < plane; ++i) {
    const int label = gt_labels.ids[i];
    check_data(label < nc, "softmax loss: label " + std::to_string(label) +
                               " out of range");
    double m = -1e300;
    for (int c = 0; c < nc; ++c)
      m = std::max(m, static_cast<double>(act.data[c * plane + i]));
    double sum = 0.0;
    for (int c = 0; c < nc; ++c)
      sum += std::exp(static_cast<double>(act.data[c * plane + i]) - m);
    const double lse = m + std::log(sum);
    const double wt = label == 0 ? (1.0 - beta) : beta;
    out.value +=
        wt * (lse - static_cast<double>(act.data[label * plane + i]));
    for (int c = 0; c < nc; ++c) {
      double p =
          std::exp(static_cast<double>(act.data[c * plane + i]) - m) / sum;
      out.grad.data[c * plane + i] =
          static_cast<T>(wt * (p - (c == label ? 1.0 : 0.0)));
    }
  }
  if (!std::isfinite(out.value))
    throw NumericError("softmax loss: non-finite activations");
  return out;
}

}  // namespace sedge
