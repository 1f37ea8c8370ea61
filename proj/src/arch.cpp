#include "sedge/arch.hpp"

#include <fstream>
#include <memory>

#include "sedge/serialize.hpp"

namespace sedge {

const char* variant_name(ArchVariant v) {
  switch (v) {
    case ArchVariant::kBasic: return "basic";
    case ArchVariant::kDsn: return "dsn";
    case ArchVariant::kCaseNet: return "casenet";
    case ArchVariant::kCaseNetMinus: return "casenet-";
    case ArchVariant::kCaseNetEdge: return "casenet-edge";
  }
  return "?";
}

ArchVariant variant_from_name(const std::string& name) {
  if (name == "basic") return ArchVariant::kBasic;
  if (name == "dsn") return ArchVariant::kDsn;
  if (name == "casenet") return ArchVariant::kCaseNet;
  if (name == "casenet-" || name == "casenet_minus")
    return ArchVariant::kCaseNetMinus;
  if (name == "casenet-edge" || name == "casenet_edge")
    return ArchVariant::kCaseNetEdge;
  throw ConfigError("unknown architecture variant '" + name + "'");
}

std::vector<int> sliced_concat_permutation(int num_classes) {
  check_config(num_classes >= 1, "sliced concat: K must be >= 1");
  std::vector<int> perm(5 * num_classes);
  for (int k = 0; k < num_classes; ++k)
    for (int j = 0; j < 5; ++j)
      perm[static_cast<std::size_t>(k) * 5 + j] = j * num_classes + k;
  return perm;
}

std::vector<ChannelRef> shared_concat_layout(int num_classes) {
  check_config(num_classes >= 1, "shared concat: K must be >= 1");
  std::vector<ChannelRef> layout;
  layout.reserve(static_cast<std::size_t>(4) * num_classes);
  for (int k = 0; k < num_classes; ++k) {
    layout.push_back({0, 0});  // F1
    layout.push_back({1, 0});  // F2
    layout.push_back({2, 0});  // F3
    layout.push_back({3, k});  // A5 of class k
  }
  return layout;
}

namespace {

template <typename T>
int add_residual_block(GraphT<T>& g, int in, int in_ch, int out_ch,
                       int stride, int dilation, const std::string& prefix) {
  ConvSpec first{stride, dilation, 1, same_pad(3, dilation)};
  int c1 = g.add_node(std::make_unique<ConvNode<T>>(in_ch, out_ch, 3, first,
                                                    WeightInit::kHeNormal),
                      {in}, prefix + ".conv1");
  int r1 = g.add_node(std::make_unique<ReluNode<T>>(), {c1},
                      prefix + ".relu1");
  ConvSpec second{1, dilation, 1, same_pad(3, dilation)};
  int c2 = g.add_node(std::make_unique<ConvNode<T>>(out_ch, out_ch, 3, second,
                                                    WeightInit::kHeNormal),
                      {r1}, prefix + ".conv2");
  int shortcut = in;
  if (in_ch != out_ch || stride != 1) {
    ConvSpec proj{stride, 1, 1, 0};
    shortcut = g.add_node(std::make_unique<ConvNode<T>>(
                              in_ch, out_ch, 1, proj, WeightInit::kHeNormal),
                          {in}, prefix + ".proj");
  }
  int sum = g.add_node(std::make_unique<AddNode<T>>(), {c2, shortcut},
                       prefix + ".add");
  return g.add_node(std::make_unique<ReluNode<T>>(), {sum}, prefix + ".relu2");
}

// 1x1 convolution to `out_ch` channels followed by bilinear upsampling back
// to input resolution. Classification taps use out_ch = K; feature taps
// use out_ch = 1.
template <typename T>
int add_side_tap(GraphT<T>& g, int stage, int stage_ch, int out_ch,
                 int factor, const std::string& prefix) {
  ConvSpec one{1, 1, 1, 0};
  int conv = g.add_node(std::make_unique<ConvNode<T>>(stage_ch, out_ch, 1, one,
                                                      WeightInit::kHeNormal),
                        {stage}, prefix + ".conv");
  return g.add_node(std::make_unique<UpsampleNode<T>>(factor), {conv},
                    prefix + ".up");
}

}  // namespace

template <typename T>
NetworkT<T> build_network(const NetworkDef& def, uint64_t param_seed) {
  check_config(def.num_classes >= 1, "network: K must be >= 1");
  check_config(def.head == HeadKind::kMultiLabel ||
                   def.variant == ArchVariant::kBasic,
               "network: the softmax head is only defined for basic");
  check_config(def.backbone.blocks_per_stage >= 1,
               "network: blocks_per_stage must be >= 1");
  for (int ch : def.backbone.stage_channels)
    check_config(ch >= 1, "network: stage channels must be >= 1");

  NetworkT<T> net;
  net.def = def;
  auto& g = net.graph;
  net.input_node = g.add_node(std::make_unique<InputNode<T>>(), {}, "input");

  const auto& bb = def.backbone;
  int prev = net.input_node;
  int prev_ch = bb.input_channels;
  std::array<int, 5> stage_out{};
  for (int s = 0; s < 5; ++s) {
    int dilation = (s == 4) ? BackboneConfig::kStage5Dilation : 1;
    for (int b = 0; b < bb.blocks_per_stage; ++b) {
      int stride = (b == 0) ? BackboneConfig::kLocalStrides[s] : 1;
      prev = add_residual_block(g, prev, prev_ch, bb.stage_channels[s],
                                stride, dilation,
                                "stage" + std::to_string(s + 1) + ".block" +
                                    std::to_string(b));
      prev_ch = bb.stage_channels[s];
    }
    stage_out[s] = prev;
  }

  const int K = def.num_classes;
  const int KO = def.out_channels();
  const auto& strides = BackboneConfig::kCumulativeStrides;

  switch (def.variant) {
    case ArchVariant::kBasic: {
      int tap = add_side_tap(g, stage_out[4], bb.stage_channels[4], KO,
                             strides[4], "cls5");
      g.mark_output("fused", tap);
      break;
    }
    case ArchVariant::kDsn: {
      std::vector<int> sides;
      for (int j = 0; j < 5; ++j) {
        int tap = add_side_tap(g, stage_out[j], bb.stage_channels[j], K,
                               strides[j], "cls" + std::to_string(j + 1));
        g.mark_output("side" + std::to_string(j + 1), tap);
        sides.push_back(tap);
      }
      std::vector<ChannelRef> layout;
      for (int flat : sliced_concat_permutation(K))
        layout.push_back({flat / K, flat % K});
      int cat = g.add_node(std::make_unique<ConcatNode<T>>(layout), sides,
                           "sliced_concat");
      ConvSpec grouped{1, 1, K, 0};
      int fused = g.add_node(
          std::make_unique<ConvNode<T>>(5 * K, K, 1, grouped,
                                        WeightInit::kGroupAverage),
          {cat}, "fused_cls");
      g.mark_output("fused", fused);
      break;
    }
    case ArchVariant::kCaseNet:
    case ArchVariant::kCaseNetMinus:
    case ArchVariant::kCaseNetEdge: {
      std::vector<int> cat_inputs;
      for (int j = 0; j < 3; ++j) {
        int tap = add_side_tap(g, stage_out[j], bb.stage_channels[j], 1,
                               strides[j], "feat" + std::to_string(j + 1));
        g.mark_output("feat" + std::to_string(j + 1), tap);
        cat_inputs.push_back(tap);
      }
      int side5 = add_side_tap(g, stage_out[4], bb.stage_channels[4], K,
                               strides[4], "cls5");
      g.mark_output("side5", side5);
      cat_inputs.push_back(side5);
      int cat = g.add_node(
          std::make_unique<ConcatNode<T>>(shared_concat_layout(K)),
          cat_inputs, "shared_concat");
      ConvSpec grouped{1, 1, K, 0};
      int fused = g.add_node(
          std::make_unique<ConvNode<T>>(4 * K, K, 1, grouped,
                                        WeightInit::kGroupAverage),
          {cat}, "fused_cls");
      g.mark_output("fused", fused);
      break;
    }
  }

  g.init_params(param_seed);
  return net;
}

template NetworkT<float> build_network<float>(const NetworkDef&, uint64_t);
template NetworkT<double> build_network<double>(const NetworkDef&, uint64_t);

std::vector<SupervisedOutput> supervised_outputs(const NetworkDef& def) {
  switch (def.variant) {
    case ArchVariant::kBasic:
      return {{"fused", def.head == HeadKind::kSoftmax ? LossKind::kSoftmax
                                                       : LossKind::kMultiLabel}};
    case ArchVariant::kDsn:
      return {{"side1", LossKind::kMultiLabel},
              {"side2", LossKind::kMultiLabel},
              {"side3", LossKind::kMultiLabel},
              {"side4", LossKind::kMultiLabel},
              {"side5", LossKind::kMultiLabel},
              {"fused", LossKind::kMultiLabel}};
    case ArchVariant::kCaseNet:
      return {{"side5", LossKind::kMultiLabel},
              {"fused", LossKind::kMultiLabel}};
    case ArchVariant::kCaseNetMinus:
      return {{"fused", LossKind::kMultiLabel}};
    case ArchVariant::kCaseNetEdge:
      return {{"feat1", LossKind::kBinaryEdge},
              {"feat2", LossKind::kBinaryEdge},
              {"feat3", LossKind::kBinaryEdge},
              {"side5", LossKind::kMultiLabel},
              {"fused", LossKind::kMultiLabel}};
  }
  return {};
}

namespace {
constexpr char kCheckpointMagic[4] = {'S', 'E', 'D', 'W'};
constexpr uint16_t kCheckpointVersion = 1;
}  // namespace

void save_checkpoint(const Network& net, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  check_data(os.good(), "cannot open checkpoint for writing: " + path);
  os.write(kCheckpointMagic, 4);
  bin::put_u16(os, kCheckpointVersion);
  bin::put_u8(os, static_cast<uint8_t>(net.def.variant));
  bin::put_u16(os, static_cast<uint16_t>(net.def.num_classes));
  bin::put_u8(os, static_cast<uint8_t>(net.def.head));
  bin::put_u16(os, static_cast<uint16_t>(net.def.backbone.input_channels));
  for (int ch : net.def.backbone.stage_channels)
    bin::put_u16(os, static_cast<uint16_t>(ch));
  bin::put_u16(os, static_cast<uint16_t>(net.def.backbone.blocks_per_stage));
  for (auto* p : const_cast<Network&>(net).graph.parameters())
    for (float v : p->value.data) bin::put_f32(os, v);
  check_data(os.good(), "failed writing checkpoint: " + path);
}

Network load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  check_data(is.good(), "cannot open checkpoint: " + path);
  bin::expect_magic(is, kCheckpointMagic, "SEDW checkpoint");
  uint16_t version = bin::get_u16(is);
  check_data(version == kCheckpointVersion,
             "unsupported checkpoint version " + std::to_string(version));
  NetworkDef def;
  uint8_t variant = bin::get_u8(is);
  check_data(variant <= 4, "corrupt checkpoint: bad variant id");
  def.variant = static_cast<ArchVariant>(variant);
  def.num_classes = bin::get_u16(is);
  uint8_t head = bin::get_u8(is);
  check_data(head <= 1, "corrupt checkpoint: bad head kind");
  def.head = static_cast<HeadKind>(head);
  def.backbone.input_channels = bin::get_u16(is);
  for (int& ch : def.backbone.stage_channels) ch = bin::get_u16(is);
  def.backbone.blocks_per_stage = bin::get_u16(is);

  Network net = build_network<float>(def, 0);
  for (auto* p : net.graph.parameters())
    for (float& v : p->value.data) v = bin::get_f32(is);
  if (is.peek() != EOF) throw DataError("trailing bytes in checkpoint");
  return net;
}

}  // namespace sedge
