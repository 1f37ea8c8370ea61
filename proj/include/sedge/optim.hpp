#pragma once

#include <vector>

#include "sedge/graph.hpp"

namespace sedge {

struct SgdConfig {
  float momentum = 0.9f;
  float weight_decay = 0.0005f;
  int iter_size = 10;  // gradient accumulations per parameter update
};

// SGD with momentum, weight decay and gradient accumulation:
//   g     = grad_sum / iter_size + weight_decay * value
//   accum = momentum * accum + lr * g
//   value = value - accum
template <typename T>
class SgdT {
 public:
  SgdT(std::vector<ParameterT<T>*> params, SgdConfig cfg)
      : params_(std::move(params)), cfg_(cfg) {
    check_config(cfg_.iter_size >= 1, "sgd: iter_size must be >= 1");
  }

  // Call once after every backward pass that contributed gradients.
  void note_accumulation() { ++accumulated_; }

  int accumulated() const { return accumulated_; }
  bool ready() const { return accumulated_ == cfg_.iter_size; }

  void step(T lr) {
    check_config(accumulated_ == cfg_.iter_size,
                 "sgd: step taken after " + std::to_string(accumulated_) +
                     " accumulations, expected " +
                     std::to_string(cfg_.iter_size));
    const T inv = T(1) / static_cast<T>(cfg_.iter_size);
    const T mom = static_cast<T>(cfg_.momentum);
    const T decay = static_cast<T>(cfg_.weight_decay);
    for (auto* p : params_) {
      for (std::size_t i = 0; i < p->value.size(); ++i) {
        T g = p->grad.data[i] * inv + decay * p->value.data[i];
        T a = mom * p->accum.data[i] + lr * g;
        p->accum.data[i] = a;
        p->value.data[i] -= a;
        p->grad.data[i] = T(0);
      }
    }
    accumulated_ = 0;
  }

  const SgdConfig& config() const { return cfg_; }

 private:
  std::vector<ParameterT<T>*> params_;
  SgdConfig cfg_;
  int accumulated_ = 0;
};

using Sgd = SgdT<float>;

}  // namespace sedge
