#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sedge/graph.hpp"

namespace sedge {

enum class ArchVariant : uint8_t {
  kBasic = 0,
  kDsn = 1,
  kCaseNet = 2,
  kCaseNetMinus = 3,  // CASENet graph, no side-5 supervision
  kCaseNetEdge = 4,   // CASENet graph + binary edge losses on sides 1-3
};

const char* variant_name(ArchVariant v);
ArchVariant variant_from_name(const std::string& name);

// What the head predicts. The softmax head is the multi-class baseline: it
// has num_classes+1 output channels, channel 0 being "no edge".
enum class HeadKind : uint8_t { kMultiLabel = 0, kSoftmax = 1 };

// Five residual stages. Cumulative strides are fixed at (1,2,4,8,8): the
// first and fifth stages keep stride 1 and the fifth dilates by 2 instead,
// so its receptive field keeps growing without losing resolution.
struct BackboneConfig {
  std::array<int, 5> stage_channels{16, 32, 64, 128, 128};
  int blocks_per_stage = 1;
  int input_channels = 3;

  static constexpr std::array<int, 5> kCumulativeStrides{1, 2, 4, 8, 8};
  static constexpr std::array<int, 5> kLocalStrides{1, 2, 2, 2, 1};
  static constexpr int kStage5Dilation = 2;

  bool operator==(const BackboneConfig&) const = default;
};

struct NetworkDef {
  ArchVariant variant = ArchVariant::kCaseNet;
  int num_classes = 1;
  HeadKind head = HeadKind::kMultiLabel;
  BackboneConfig backbone;

  // Output channels of every classification tap (K, or K+1 for softmax).
  int out_channels() const {
    return head == HeadKind::kSoftmax ? num_classes + 1 : num_classes;
  }
};

// A built network: the executable graph plus its defining config. Named
// outputs by variant (all at input resolution):
//   Basic:          "fused"
//   DSN:            "side1".."side5", "fused"
//   CASENet family: "feat1".."feat3", "side5", "fused"
template <typename T>
struct NetworkT {
  NetworkDef def;
  GraphT<T> graph;
  int input_node = -1;

  void forward(const TensorT<T>& image) { graph.forward(image); }
  const TensorT<T>& output(const std::string& name) const {
    return graph.output(name);
  }
};

using Network = NetworkT<float>;

// Interleaves five K-channel side activations so the five scales of each
// class land in adjacent channels: out[k*5 + j] = side_j, class k.
std::vector<int> sliced_concat_permutation(int num_classes);

// Layout for replicating three 1-channel features into every class group:
// group k holds {F1, F2, F3, A5_k}. Inputs are [F1, F2, F3, A5].
std::vector<ChannelRef> shared_concat_layout(int num_classes);

template <typename T>
NetworkT<T> build_network(const NetworkDef& def, uint64_t param_seed);

extern template NetworkT<float> build_network<float>(const NetworkDef&,
                                                     uint64_t);
extern template NetworkT<double> build_network<double>(const NetworkDef&,
                                                       uint64_t);

// Supervision wiring: which named outputs carry a loss for a variant.
enum class LossKind { kMultiLabel, kBinaryEdge, kSoftmax };

struct SupervisedOutput {
  std::string output;
  LossKind loss;
};

std::vector<SupervisedOutput> supervised_outputs(const NetworkDef& def);

// Checkpoint file ("SEDW"): header with the network definition followed by
// all parameter values as little-endian f32 in deterministic graph order.
// Save/load round-trips bit-exactly.
void save_checkpoint(const Network& net, const std::string& path);
Network load_checkpoint(const std::string& path);

}  // namespace sedge
