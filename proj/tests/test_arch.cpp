#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "sedge/arch.hpp"
#include "test_util.hpp"

using namespace sedge;
using sedge::test::random_tensor;

namespace {

NetworkDef def_for(ArchVariant v, int k) {
  NetworkDef def;
  def.variant = v;
  def.num_classes = k;
  def.backbone.stage_channels = {4, 6, 8, 10, 10};  // small for tests
  return def;
}

}  // namespace

TEST_CASE("basic exposes exactly one K-channel output at input resolution") {
  auto net = build_network<float>(def_for(ArchVariant::kBasic, 20), 1);
  Rng rng(1);
  net.forward(random_tensor<float>(rng, 1, 3, 16, 16, 0.3));
  const Tensor& out = net.output("fused");
  CHECK(out.c == 20);
  CHECK(out.h == 16);
  CHECK(out.w == 16);
  CHECK(net.graph.outputs().size() == 1);
}

TEST_CASE("dsn exposes five side outputs plus fused") {
  auto net = build_network<float>(def_for(ArchVariant::kDsn, 2), 2);
  Rng rng(2);
  net.forward(random_tensor<float>(rng, 1, 3, 16, 16, 0.3));
  for (int j = 1; j <= 5; ++j) {
    const Tensor& s = net.output("side" + std::to_string(j));
    CHECK(s.c == 2);
    CHECK(s.h == 16);
    CHECK(s.w == 16);
  }
  CHECK(net.output("fused").c == 2);
  CHECK(net.output("fused").h == 16);
}

TEST_CASE("casenet exposes three 1-channel features, side5 and fused") {
  auto net = build_network<float>(def_for(ArchVariant::kCaseNet, 3), 3);
  Rng rng(3);
  net.forward(random_tensor<float>(rng, 1, 3, 16, 16, 0.3));
  for (int j = 1; j <= 3; ++j) {
    const Tensor& f = net.output("feat" + std::to_string(j));
    CHECK(f.c == 1);
    CHECK(f.h == 16);
  }
  CHECK(net.output("side5").c == 3);
  CHECK(net.output("fused").c == 3);
}

TEST_CASE("K = 0 is a configuration error") {
  CHECK_THROWS_AS(build_network<float>(def_for(ArchVariant::kBasic, 0), 1),
                  ConfigError);
}

TEST_CASE("softmax head adds the background channel (basic only)") {
  NetworkDef def = def_for(ArchVariant::kBasic, 3);
  def.head = HeadKind::kSoftmax;
  auto net = build_network<float>(def, 4);
  Rng rng(4);
  net.forward(random_tensor<float>(rng, 1, 3, 8, 8, 0.3));
  CHECK(net.output("fused").c == 4);

  NetworkDef bad = def_for(ArchVariant::kDsn, 3);
  bad.head = HeadKind::kSoftmax;
  CHECK_THROWS_AS(build_network<float>(bad, 1), ConfigError);
}

TEST_CASE("sliced concatenation channel order") {
  // out[k*5 + j] holds side j+1 of class k+1.
  auto perm = sliced_concat_permutation(2);
  CHECK(perm.size() == 10);
  CHECK(perm[7] == 2 * 2 + 1);  // 0-based channel 7 -> side 3, class 2
  auto single = sliced_concat_permutation(1);
  CHECK(single == std::vector<int>({0, 1, 2, 3, 4}));

  // Apply to distinguishable tensors: value = 10*side + class.
  const int K = 3;
  std::vector<Tensor> sides;
  for (int j = 0; j < 5; ++j) {
    Tensor t(1, K, 2, 2);
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < 4; ++i)
        t.plane(0, k)[i] = static_cast<float>(10 * (j + 1) + (k + 1));
    sides.push_back(std::move(t));
  }
  std::vector<const Tensor*> xs;
  for (auto& t : sides) xs.push_back(&t);
  Tensor cat = concat_channels_forward(
      xs, permutation_layout(xs, sliced_concat_permutation(K)));
  CHECK(cat.c == 5 * K);
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < 5; ++j)
      CHECK(cat.plane(0, k * 5 + j)[0] ==
            static_cast<float>(10 * (j + 1) + (k + 1)));
}

TEST_CASE("shared concatenation layout and replication") {
  auto layout = shared_concat_layout(3);
  CHECK(layout.size() == 12);
  // 0-based channel 4 starts group 1 and is F1 again.
  CHECK(layout[4].input == 0);
  CHECK(layout[4].channel == 0);
  auto single = shared_concat_layout(1);
  CHECK(single.size() == 4);

  Rng rng(5);
  auto f1 = random_tensor<float>(rng, 1, 1, 4, 4);
  auto f2 = random_tensor<float>(rng, 1, 1, 4, 4);
  auto f3 = random_tensor<float>(rng, 1, 1, 4, 4);
  auto a5 = random_tensor<float>(rng, 1, 3, 4, 4);
  std::vector<const Tensor*> xs{&f1, &f2, &f3, &a5};
  Tensor cat = concat_channels_forward(xs, layout);
  for (int i = 0; i < 16; ++i) {
    CHECK(cat.plane(0, 0)[i] == cat.plane(0, 4)[i]);  // replicated F1
    CHECK(cat.plane(0, 0)[i] == cat.plane(0, 8)[i]);
    CHECK(cat.plane(0, 3)[i] == a5.plane(0, 0)[i]);
    CHECK(cat.plane(0, 7)[i] == a5.plane(0, 1)[i]);
  }
}

TEST_CASE("fused classification reads only its own class group") {
  // Bumping the side-5 bias of class j changes A5_j only; with shared
  // concatenation + K-grouped fusion, fused channels k != j must be
  // bitwise unchanged.
  auto net = build_network<float>(def_for(ArchVariant::kCaseNet, 3), 6);
  Rng rng(6);
  Tensor x = random_tensor<float>(rng, 1, 3, 16, 16, 0.3);
  net.forward(x);
  Tensor before = net.output("fused");

  ConvNode<float>* cls5 = nullptr;
  for (int i = 0; i < net.graph.num_nodes(); ++i)
    if (net.graph.node(i).name == "cls5.conv")
      cls5 = dynamic_cast<ConvNode<float>*>(&net.graph.node(i));
  REQUIRE(cls5 != nullptr);
  const int j = 1;
  cls5->bias().value.data[j] += 0.5f;
  net.forward(x);
  const Tensor& after = net.output("fused");

  const std::size_t plane = 16 * 16;
  for (int k = 0; k < 3; ++k) {
    bool identical = true;
    for (std::size_t i = 0; i < plane; ++i)
      identical &= before.plane(0, k)[i] == after.plane(0, k)[i];
    if (k == j) CHECK_FALSE(identical);
    else CHECK(identical);
  }
}

TEST_CASE("casenet and casenet- share forward outputs bitwise") {
  auto a = build_network<float>(def_for(ArchVariant::kCaseNet, 2), 9);
  auto b = build_network<float>(def_for(ArchVariant::kCaseNetMinus, 2), 9);
  Rng rng(7);
  Tensor x = random_tensor<float>(rng, 1, 3, 16, 16, 0.3);
  a.forward(x);
  b.forward(x);
  for (const char* name : {"feat1", "feat2", "feat3", "side5", "fused"}) {
    const Tensor& ta = a.output(name);
    const Tensor& tb = b.output(name);
    REQUIRE(ta.size() == tb.size());
    for (std::size_t i = 0; i < ta.size(); ++i)
      CHECK(ta.data[i] == tb.data[i]);
  }
  // They differ only in which losses are attached.
  CHECK(supervised_outputs(a.def).size() == 2);
  CHECK(supervised_outputs(b.def).size() == 1);
  CHECK(supervised_outputs(def_for(ArchVariant::kCaseNetEdge, 2)).size() == 5);
  CHECK(supervised_outputs(def_for(ArchVariant::kDsn, 2)).size() == 6);
}

TEST_CASE("stage-5 dilation bookkeeping") {
  // A strided 3x3 and a dilated 3x3 both touch 9 input pixels per output
  // unit; the dilated one spreads them over extent d*(k-1)+1 = 5 while
  // keeping full output resolution.
  auto probe = [](ConvSpec spec, int oy, int ox, int* span) {
    TensorT<double> x(1, 1, 9, 9);
    TensorT<double> w(1, 1, 3, 3);
    w.fill(1.0);
    TensorT<double> out = conv2d_forward<double>(x, w, nullptr, spec);
    TensorT<double> gout = out.zeros_like();
    gout.at(0, 0, oy, ox) = 1.0;
    TensorT<double> gx = x.zeros_like();
    conv2d_backward<double>(x, w, spec, gout, &gx, nullptr, nullptr);
    int count = 0, lo = 9, hi = -1;
    for (int y = 0; y < 9; ++y)
      for (int xx = 0; xx < 9; ++xx)
        if (gx.at(0, 0, y, xx) != 0.0) {
          ++count;
          lo = std::min(lo, y);
          hi = std::max(hi, y);
        }
    *span = hi - lo + 1;
    return count;
  };

  int span_strided = 0, span_dilated = 0;
  ConvSpec strided{2, 1, 1, 1};
  ConvSpec dilated{1, 2, 1, 2};
  CHECK(probe(strided, 2, 2, &span_strided) == 9);
  CHECK(probe(dilated, 4, 4, &span_dilated) == 9);
  CHECK(span_strided == 3);
  CHECK(span_dilated == 2 * (3 - 1) + 1);

  TensorT<double> x(1, 1, 9, 9);
  TensorT<double> w(1, 1, 3, 3);
  CHECK(conv2d_forward<double>(x, w, nullptr, strided).h == 5);
  CHECK(conv2d_forward<double>(x, w, nullptr, dilated).h == 9);
}

TEST_CASE("zeroed classification tap gives sigma = 0.5 everywhere") {
  GraphT<float> g;
  int in = g.add_node(std::make_unique<InputNode<float>>(), {}, "in");
  ConvSpec one{1, 1, 1, 0};
  int conv = g.add_node(std::make_unique<ConvNode<float>>(
                            4, 2, 1, one, WeightInit::kHeNormal),
                        {in}, "cls");
  int up = g.add_node(std::make_unique<UpsampleNode<float>>(2), {conv}, "up");
  g.mark_output("y", up);  // weights stay zero: init_params never called
  Rng rng(8);
  g.forward(random_tensor<float>(rng, 1, 4, 4, 4));
  Tensor y = sigmoid_forward(g.output("y"));
  CHECK(y.h == 8);
  for (float v : y.data) CHECK(v == 0.5f);
}

TEST_CASE("checkpoint round-trips bit-exactly") {
  namespace fsys = std::filesystem;
  fsys::path dir = fsys::temp_directory_path() / "sedge_arch_test";
  fsys::create_directories(dir);
  std::string path = (dir / "net.sedw").string();

  NetworkDef def = def_for(ArchVariant::kCaseNetEdge, 3);
  def.backbone.blocks_per_stage = 2;
  auto net = build_network<float>(def, 1234);
  save_checkpoint(net, path);
  Network loaded = load_checkpoint(path);

  CHECK(loaded.def.variant == def.variant);
  CHECK(loaded.def.num_classes == 3);
  CHECK(loaded.def.backbone == def.backbone);

  auto pa = net.graph.parameters();
  auto pb = loaded.graph.parameters();
  REQUIRE(pa.size() == pb.size());
  for (size_t i = 0; i < pa.size(); ++i) {
    REQUIRE(pa[i]->value.size() == pb[i]->value.size());
    for (size_t j = 0; j < pa[i]->value.size(); ++j)
      CHECK(pa[i]->value.data[j] == pb[i]->value.data[j]);
  }

  // Save the loaded copy again: files must be byte-identical.
  std::string path2 = (dir / "net2.sedw").string();
  save_checkpoint(loaded, path2);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  std::string b1((std::istreambuf_iterator<char>(f1)), {});
  std::string b2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(b1 == b2);
  CHECK(b1.substr(0, 4) == "SEDW");

  // Truncated and trailing-garbage files are data errors.
  std::ofstream trunc((dir / "trunc.sedw").string(), std::ios::binary);
  trunc << b1.substr(0, b1.size() / 2);
  trunc.close();
  CHECK_THROWS_AS(load_checkpoint((dir / "trunc.sedw").string()), DataError);
  std::ofstream extra((dir / "extra.sedw").string(), std::ios::binary);
  extra << b1 << "x";
  extra.close();
  CHECK_THROWS_AS(load_checkpoint((dir / "extra.sedw").string()), DataError);
}

TEST_CASE("forward determinism: same seed, same outputs, bitwise") {
  auto a = build_network<float>(def_for(ArchVariant::kDsn, 2), 4242);
  auto b = build_network<float>(def_for(ArchVariant::kDsn, 2), 4242);
  Rng rng(9);
  Tensor x = random_tensor<float>(rng, 1, 3, 16, 16, 0.3);
  a.forward(x);
  a.forward(x);  // re-running must not drift
  b.forward(x);
  const Tensor& ya = a.output("fused");
  const Tensor& yb = b.output("fused");
  for (std::size_t i = 0; i < ya.size(); ++i) CHECK(ya.data[i] == yb.data[i]);
}
