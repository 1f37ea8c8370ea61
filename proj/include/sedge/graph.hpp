#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "sedge/ops.hpp"
#include "sedge/rng.hpp"
#include "sedge/tensor.hpp"

namespace sedge {

// A learnable tensor with its gradient and momentum buffer. The three
// tensors always share one shape.
template <typename T>
struct ParameterT {
  std::string name;
  TensorT<T> value;
  TensorT<T> grad;
  TensorT<T> accum;

  void set_shape(int n, int c, int h, int w) {
    value = TensorT<T>(n, c, h, w);
    grad = TensorT<T>(n, c, h, w);
    accum = TensorT<T>(n, c, h, w);
  }
};

using Parameter = ParameterT<float>;

enum class WeightInit {
  kHeNormal,     // N(0, sqrt(2 / fan_in))
  kGroupAverage  // constant 1 / fan_in: the layer starts as a group mean
};

enum class FiniteCheck { kOff, kOutputs, kAll };

template <typename T>
class GraphT;

template <typename T>
class NodeT {
 public:
  virtual ~NodeT() = default;
  virtual void forward(GraphT<T>& g) = 0;
  virtual void backward(GraphT<T>& g) = 0;
  virtual std::vector<ParameterT<T>*> params() { return {}; }

  std::vector<int> inputs;
  std::string name;
  TensorT<T> out;
  TensorT<T> grad;  // dLoss/dout, filled by consumers during backward
};

// Executable DAG of layers. Nodes are stored in the order they were added,
// which is also the execution order; backward walks the exact reverse, so
// the node list doubles as the tape. Topology is fixed after construction.
template <typename T>
class GraphT {
 public:
  GraphT() = default;
  GraphT(const GraphT&) = delete;
  GraphT& operator=(const GraphT&) = delete;
  GraphT(GraphT&&) = default;
  GraphT& operator=(GraphT&&) = default;

  int add_node(std::unique_ptr<NodeT<T>> node, std::vector<int> inputs,
               std::string name) {
    for (int i : inputs)
      check_config(i >= 0 && i < static_cast<int>(nodes_.size()),
                   "graph: input node must precede its consumer");
    node->inputs = std::move(inputs);
    node->name = std::move(name);
    nodes_.push_back(std::move(node));
    return static_cast<int>(nodes_.size()) - 1;
  }

  void mark_output(const std::string& name, int node) {
    outputs_.emplace_back(name, node);
  }

  NodeT<T>& node(int id) { return *nodes_[id]; }
  const NodeT<T>& node(int id) const { return *nodes_[id]; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }

  const std::vector<std::pair<std::string, int>>& outputs() const {
    return outputs_;
  }

  bool has_output(const std::string& name) const {
    return find_output(name) >= 0;
  }

  const TensorT<T>& output(const std::string& name) const {
    int id = find_output(name);
    check_config(id >= 0, "graph: unknown output '" + name + "'");
    return nodes_[id]->out;
  }

  // Parameters in deterministic graph order; checkpoint layout relies on it.
  std::vector<ParameterT<T>*> parameters() {
    std::vector<ParameterT<T>*> out;
    for (auto& n : nodes_)
      for (auto* p : n->params()) out.push_back(p);
    return out;
  }

  void init_params(uint64_t seed);  // defined after ConvNode

  void forward(const TensorT<T>& input) {
    staged_input_ = &input;
    for (auto& n : nodes_) {
      n->forward(*this);
      if (finite_check_ == FiniteCheck::kAll && !n->out.all_finite())
        throw NumericError("non-finite values after node '" + n->name + "'");
      if (!n->grad.same_shape(n->out)) n->grad = n->out.zeros_like();
      else n->grad.zero();
    }
    if (finite_check_ == FiniteCheck::kOutputs) {
      for (const auto& [name, id] : outputs_)
        if (!nodes_[id]->out.all_finite())
          throw NumericError("non-finite values in output '" + name + "'");
    }
    staged_input_ = nullptr;
  }

  // Adds into the stored dLoss/doutput ahead of backward(); several outputs
  // may be seeded when more than one loss is attached.
  void add_output_grad(const std::string& name, const TensorT<T>& g) {
    int id = find_output(name);
    check_config(id >= 0, "graph: unknown output '" + name + "'");
    auto& node = *nodes_[id];
    check_config(node.grad.same_shape(g),
                 "graph: output grad shape mismatch for '" + name + "'");
    for (std::size_t i = 0; i < g.size(); ++i)
      node.grad.data[i] += g.data[i];
  }

  // Reverse sweep over the execution order. Parameter gradients accumulate
  // across calls; the optimizer owns zeroing them.
  void backward() {
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it)
      (*it)->backward(*this);
  }

  void set_finite_check(FiniteCheck fc) { finite_check_ = fc; }

  const TensorT<T>& staged_input() const {
    check_config(staged_input_ != nullptr, "graph: no staged input");
    return *staged_input_;
  }

 private:
  int find_output(const std::string& name) const {
    for (const auto& [n, id] : outputs_)
      if (n == name) return id;
    return -1;
  }

  std::vector<std::unique_ptr<NodeT<T>>> nodes_;
  std::vector<std::pair<std::string, int>> outputs_;
  const TensorT<T>* staged_input_ = nullptr;
  FiniteCheck finite_check_ = FiniteCheck::kOutputs;
};

template <typename T>
class InputNode : public NodeT<T> {
 public:
  void forward(GraphT<T>& g) override { this->out = g.staged_input(); }
  void backward(GraphT<T>&) override {}
};

template <typename T>
class ConvNode : public NodeT<T> {
 public:
  ConvNode(int in_channels, int out_channels, int ksize, ConvSpec spec,
           WeightInit init)
      : spec_(spec), init_(init) {
    check_config(in_channels % spec.groups == 0 &&
                     out_channels % spec.groups == 0,
                 "conv node: channels not divisible by groups");
    weight_.set_shape(out_channels, in_channels / spec.groups, ksize, ksize);
    bias_.set_shape(1, out_channels, 1, 1);
  }

  void forward(GraphT<T>& g) override {
    this->out = conv2d_forward(g.node(this->inputs[0]).out, weight_.value,
                               &bias_.value, spec_);
  }

  void backward(GraphT<T>& g) override {
    auto& src = g.node(this->inputs[0]);
    conv2d_backward(src.out, weight_.value, spec_, this->grad, &src.grad,
                    &weight_.grad, &bias_.grad);
  }

  std::vector<ParameterT<T>*> params() override { return {&weight_, &bias_}; }

  void init_values(Rng rng) {
    const int fan_in = weight_.value.c * weight_.value.h * weight_.value.w;
    if (init_ == WeightInit::kGroupAverage) {
      weight_.value.fill(static_cast<T>(1.0 / fan_in));
    } else {
      // Draw in double, round through float: the float and double graph
      // instantiations then start from bit-identical values.
      double stddev = std::sqrt(2.0 / fan_in);
      for (auto& v : weight_.value.data)
        v = static_cast<T>(static_cast<float>(stddev * rng.next_gaussian()));
    }
    bias_.value.zero();
  }

  const ConvSpec& spec() const { return spec_; }
  ParameterT<T>& weight() { return weight_; }
  ParameterT<T>& bias() { return bias_; }

 private:
  ParameterT<T> weight_;
  ParameterT<T> bias_;
  ConvSpec spec_;
  WeightInit init_;
};

template <typename T>
class ReluNode : public NodeT<T> {
 public:
  void forward(GraphT<T>& g) override {
    this->out = relu_forward(g.node(this->inputs[0]).out);
  }
  void backward(GraphT<T>& g) override {
    auto& src = g.node(this->inputs[0]);
    relu_backward(src.out, this->grad, src.grad);
  }
};

template <typename T>
class AddNode : public NodeT<T> {
 public:
  void forward(GraphT<T>& g) override {
    this->out = add_forward(g.node(this->inputs[0]).out,
                            g.node(this->inputs[1]).out);
  }
  void backward(GraphT<T>& g) override {
    for (int idx : {0, 1}) {
      auto& src = g.node(this->inputs[idx]);
      for (std::size_t i = 0; i < this->grad.size(); ++i)
        src.grad.data[i] += this->grad.data[i];
    }
  }
};

template <typename T>
class ConcatNode : public NodeT<T> {
 public:
  explicit ConcatNode(std::vector<ChannelRef> layout)
      : layout_(std::move(layout)) {}

  void forward(GraphT<T>& g) override {
    std::vector<const TensorT<T>*> xs;
    xs.reserve(this->inputs.size());
    for (int i : this->inputs) xs.push_back(&g.node(i).out);
    this->out = concat_channels_forward(xs, layout_);
  }

  void backward(GraphT<T>& g) override {
    std::vector<TensorT<T>*> gxs;
    gxs.reserve(this->inputs.size());
    for (int i : this->inputs) gxs.push_back(&g.node(i).grad);
    concat_channels_backward(this->grad, layout_, gxs);
  }

  const std::vector<ChannelRef>& layout() const { return layout_; }

 private:
  std::vector<ChannelRef> layout_;
};

// Fixed bilinear kernel; never learned.
template <typename T>
class UpsampleNode : public NodeT<T> {
 public:
  explicit UpsampleNode(int factor) : factor_(factor) {}

  void forward(GraphT<T>& g) override {
    this->out = upsample_bilinear_forward(g.node(this->inputs[0]).out,
                                          factor_);
  }
  void backward(GraphT<T>& g) override {
    upsample_bilinear_backward(this->grad, factor_,
                               g.node(this->inputs[0]).grad);
  }

  int factor() const { return factor_; }

 private:
  int factor_;
};

template <typename T>
void GraphT<T>::init_params(uint64_t seed) {
  Rng root(seed);
  uint64_t stream = 0;
  for (auto& n : nodes_) {
    if (auto* conv = dynamic_cast<ConvNode<T>*>(n.get()))
      conv->init_values(root.split(stream));
    stream += n->params().size();
  }
}

using Graph = GraphT<float>;

}  // namespace sedge
