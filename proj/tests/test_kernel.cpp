#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sedge/graph.hpp"
#include "sedge/optim.hpp"
#include "test_util.hpp"

using namespace sedge;
using sedge::test::gradcheck_sample;
using sedge::test::random_tensor;
using sedge::test::rel_err;

TEST_CASE("conv2d grouped 1x1 forward arithmetic") {
  // Group 0 input channels hold constants 1..4; its weights are
  // [0.1, 0.2, 0.3, 0.4], so the group-0 output is 3.0 everywhere.
  Tensor x(1, 8, 2, 2);
  for (int c = 0; c < 8; ++c)
    for (int i = 0; i < 4; ++i) x.plane(0, c)[i] = static_cast<float>(c + 1);
  Tensor w(2, 4, 1, 1);
  w.data = {0.1f, 0.2f, 0.3f, 0.4f, 1.f, 1.f, 1.f, 1.f};
  ConvSpec spec{1, 1, 2, 0};
  Tensor out = conv2d_forward<float>(x, w, nullptr, spec);
  CHECK(out.c == 2);
  for (int i = 0; i < 4; ++i) {
    CHECK(out.plane(0, 0)[i] == doctest::Approx(3.0f));
    CHECK(out.plane(0, 1)[i] == doctest::Approx(5.f + 6.f + 7.f + 8.f));
  }
}

TEST_CASE("conv2d dilation output size") {
  // 3x3 kernel, dilation 2 -> effective extent 5; pad 2 keeps 9x9.
  Tensor x(1, 1, 9, 9);
  Tensor w(1, 1, 3, 3);
  ConvSpec spec{1, 2, 1, 2};
  CHECK(same_pad(3, 2) == 2);
  Tensor out = conv2d_forward<float>(x, w, nullptr, spec);
  CHECK(out.h == 9);
  CHECK(out.w == 9);
}

TEST_CASE("conv2d shape errors") {
  Tensor x(1, 3, 4, 4);
  Tensor w(4, 2, 3, 3);  // expects 2 input channels per group
  ConvSpec spec{1, 1, 1, 1};
  CHECK_THROWS_AS(conv2d_forward<float>(x, w, nullptr, spec), ConfigError);
  Tensor w2(3, 3, 3, 3);  // out channels not divisible by groups
  ConvSpec grouped{1, 1, 2, 1};
  CHECK_THROWS_AS(conv2d_forward<float>(x, w2, nullptr, grouped), ConfigError);
}

namespace {

// Scalar loss over a double-precision conv output; the weighting tensor
// makes the gradient dense and generic.
double conv_loss(const TensorT<double>& x, const TensorT<double>& w,
                 const TensorT<double>& b, const ConvSpec& spec,
                 const TensorT<double>& mix) {
  TensorT<double> out = conv2d_forward(x, w, &b, spec);
  double acc = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) acc += out.data[i] * mix.data[i];
  return acc;
}

}  // namespace

TEST_CASE("conv2d gradients match central finite differences") {
  Rng rng(42);
  struct Case {
    int ci, co, k, h, w;
    ConvSpec spec;
  };
  const Case cases[] = {
      {2, 3, 3, 5, 5, {1, 1, 1, 1}},   // plain 3x3
      {4, 4, 3, 6, 6, {2, 1, 1, 1}},   // stride 2
      {2, 2, 3, 9, 9, {1, 2, 1, 2}},   // dilation 2
      {4, 6, 1, 4, 4, {1, 1, 2, 0}},   // grouped 1x1
      {4, 4, 3, 7, 5, {2, 2, 2, 2}},   // everything at once
  };
  for (const auto& tc : cases) {
    CAPTURE(tc.ci);
    CAPTURE(tc.spec.groups);
    auto x = random_tensor<double>(rng, 1, tc.ci, tc.h, tc.w);
    auto w = random_tensor<double>(rng, tc.co, tc.ci / tc.spec.groups, tc.k,
                                   tc.k, 0.5);
    auto b = random_tensor<double>(rng, 1, tc.co, 1, 1, 0.2);
    TensorT<double> probe = conv2d_forward(x, w, &b, tc.spec);
    auto mix = random_tensor<double>(rng, 1, probe.c, probe.h, probe.w);

    TensorT<double> gx = x.zeros_like(), gw = w.zeros_like(),
                    gb = b.zeros_like();
    conv2d_backward(x, w, tc.spec, mix, &gx, &gw, &gb);

    auto loss = [&] { return conv_loss(x, w, b, tc.spec, mix); };
    CHECK(gradcheck_sample(rng, x.data, gx.data, loss, 40) < 1e-4);
    CHECK(gradcheck_sample(rng, w.data, gw.data, loss, 40) < 1e-4);
    CHECK(gradcheck_sample(rng, b.data, gb.data, loss, 8) < 1e-4);
  }
}

TEST_CASE("grouped conv isolation is bitwise") {
  Rng rng(7);
  auto x = random_tensor<float>(rng, 1, 6, 8, 8);
  auto w = random_tensor<float>(rng, 6, 3, 3, 3);
  ConvSpec spec{1, 1, 2, 1};
  Tensor base = conv2d_forward<float>(x, w, nullptr, spec);

  Tensor poked = x;
  for (int c = 3; c < 6; ++c)  // foreign group
    for (std::size_t i = 0; i < 64; ++i)
      poked.plane(0, c)[i] += static_cast<float>(rng.next_gaussian());
  Tensor out = conv2d_forward<float>(poked, w, nullptr, spec);
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < 64; ++i)
      CHECK(base.plane(0, c)[i] == out.plane(0, c)[i]);
}

TEST_CASE("residual block wiring") {
  SUBCASE("zero weights reduce to relu(x)") {
    GraphT<float> g;
    int in = g.add_node(std::make_unique<InputNode<float>>(), {}, "in");
    ConvSpec s3{1, 1, 1, 1};
    int c1 = g.add_node(std::make_unique<ConvNode<float>>(
                            2, 2, 3, s3, WeightInit::kHeNormal),
                        {in}, "c1");
    int r1 = g.add_node(std::make_unique<ReluNode<float>>(), {c1}, "r1");
    int c2 = g.add_node(std::make_unique<ConvNode<float>>(
                            2, 2, 3, s3, WeightInit::kHeNormal),
                        {r1}, "c2");
    int sum = g.add_node(std::make_unique<AddNode<float>>(), {c2, in}, "add");
    int out = g.add_node(std::make_unique<ReluNode<float>>(), {sum}, "out");
    g.mark_output("y", out);
    // weights default to zero until init_params runs
    Rng rng(3);
    Tensor x = random_tensor<float>(rng, 1, 2, 5, 5);
    g.forward(x);
    const Tensor& y = g.output("y");
    for (std::size_t i = 0; i < x.size(); ++i)
      CHECK(y.data[i] == std::max(0.0f, x.data[i]));
  }

  SUBCASE("channel mismatch on the add is a configuration error") {
    Tensor a(1, 2, 4, 4), b(1, 3, 4, 4);
    CHECK_THROWS_AS(add_forward(a, b), ConfigError);
  }
}

namespace {

// One residual block as the training graph wires it, on the double path.
GraphT<double> make_block(int in_ch, int out_ch, int stride, int dil,
                          uint64_t seed) {
  GraphT<double> g;
  int in = g.add_node(std::make_unique<InputNode<double>>(), {}, "in");
  ConvSpec first{stride, dil, 1, same_pad(3, dil)};
  int c1 = g.add_node(std::make_unique<ConvNode<double>>(
                          in_ch, out_ch, 3, first, WeightInit::kHeNormal),
                      {in}, "c1");
  int r1 = g.add_node(std::make_unique<ReluNode<double>>(), {c1}, "r1");
  ConvSpec second{1, dil, 1, same_pad(3, dil)};
  int c2 = g.add_node(std::make_unique<ConvNode<double>>(
                          out_ch, out_ch, 3, second, WeightInit::kHeNormal),
                      {r1}, "c2");
  int sc = in;
  if (in_ch != out_ch || stride != 1) {
    ConvSpec proj{stride, 1, 1, 0};
    sc = g.add_node(std::make_unique<ConvNode<double>>(in_ch, out_ch, 1, proj,
                                                       WeightInit::kHeNormal),
                    {in}, "proj");
  }
  int sum = g.add_node(std::make_unique<AddNode<double>>(), {c2, sc}, "add");
  int out = g.add_node(std::make_unique<ReluNode<double>>(), {sum}, "out");
  g.mark_output("y", out);
  g.init_params(seed);
  return g;
}

}  // namespace

TEST_CASE("residual block stride halves the spatial size") {
  GraphT<double> g = make_block(4, 8, 2, 1, 11);
  Rng rng(5);
  auto x = random_tensor<double>(rng, 1, 4, 8, 8);
  g.forward(x);
  CHECK(g.output("y").h == 4);
  CHECK(g.output("y").w == 4);
}

TEST_CASE("residual block gradient check, both branches") {
  GraphT<double> g = make_block(4, 4, 2, 1, 19);  // stride forces projection
  Rng rng(23);
  auto x = random_tensor<double>(rng, 1, 4, 6, 6);
  g.forward(x);
  auto mix = random_tensor<double>(rng, 1, 4, 3, 3);

  auto loss = [&] {
    g.forward(x);
    const auto& y = g.output("y");
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) acc += y.data[i] * mix.data[i];
    return acc;
  };
  // Analytic gradients for every parameter and the input.
  loss();
  g.add_output_grad("y", mix);
  g.backward();
  for (auto* p : g.parameters()) {
    // Relu kinks can foul individual finite differences; the He-scaled
    // random draw keeps activations away from exact zeros.
    CHECK(gradcheck_sample(rng, p->value.data,
                           std::vector<double>(p->grad.data), loss, 30) <
          1e-4);
  }
}

TEST_CASE("bilinear upsample") {
  SUBCASE("factor 1 is the identity") {
    Rng rng(2);
    auto x = random_tensor<float>(rng, 1, 3, 4, 4);
    Tensor up = upsample_bilinear_forward(x, 1);
    for (std::size_t i = 0; i < x.size(); ++i)
      CHECK(up.data[i] == x.data[i]);
  }

  SUBCASE("constants preserved in the interior") {
    Tensor x(1, 1, 4, 4);
    x.fill(7.0f);
    Tensor up = upsample_bilinear_forward(x, 4);
    CHECK(up.h == 16);
    // Interior: border band of factor/2 = 2 pixels sees truncated support.
    for (int y = 2; y < 14; ++y)
      for (int xx = 2; xx < 14; ++xx)
        CHECK(up.at(0, 0, y, xx) == doctest::Approx(7.0f).epsilon(1e-6));
  }

  SUBCASE("2x2 ramp matches the scalar interpolation oracle") {
    Tensor x(1, 1, 2, 2);
    x.data = {0.f, 1.f, 0.f, 1.f};
    Tensor up = upsample_bilinear_forward(x, 2);
    // Oracle: sample at src = (dst+0.5)/f - 0.5 with zero padding outside.
    auto oracle = [&](int oy, int ox) {
      auto sample = [&](int y, int xx) {
        return (y < 0 || y >= 2 || xx < 0 || xx >= 2)
                   ? 0.0
                   : static_cast<double>(x.at(0, 0, y, xx));
      };
      double sy = (oy + 0.5) / 2.0 - 0.5, sx = (ox + 0.5) / 2.0 - 0.5;
      int y0 = static_cast<int>(std::floor(sy));
      int x0 = static_cast<int>(std::floor(sx));
      double fy = sy - y0, fx = sx - x0;
      return (1 - fy) * ((1 - fx) * sample(y0, x0) + fx * sample(y0, x0 + 1)) +
             fy * ((1 - fx) * sample(y0 + 1, x0) + fx * sample(y0 + 1, x0 + 1));
    };
    for (int oy = 0; oy < 4; ++oy)
      for (int ox = 0; ox < 4; ++ox)
        CHECK(up.at(0, 0, oy, ox) ==
              doctest::Approx(oracle(oy, ox)).epsilon(1e-6));
    // Frozen expectations for the fully-supported rows.
    const float expect[4] = {0.f, 0.25f, 0.75f, 0.75f};
    for (int ox = 0; ox < 4; ++ox) {
      CHECK(up.at(0, 0, 1, ox) == doctest::Approx(expect[ox]));
      CHECK(up.at(0, 0, 2, ox) == doctest::Approx(expect[ox]));
    }
  }

  SUBCASE("linearity within 4 ulps") {
    Rng rng(77);
    auto x = random_tensor<float>(rng, 1, 2, 5, 5);
    auto y = random_tensor<float>(rng, 1, 2, 5, 5);
    const float a = 0.37f, b = -1.25f;
    Tensor combo(1, 2, 5, 5);
    for (std::size_t i = 0; i < combo.size(); ++i)
      combo.data[i] = a * x.data[i] + b * y.data[i];
    Tensor left = upsample_bilinear_forward(combo, 4);
    Tensor ux = upsample_bilinear_forward(x, 4);
    Tensor uy = upsample_bilinear_forward(y, 4);
    for (std::size_t i = 0; i < left.size(); ++i) {
      float rhs = a * ux.data[i] + b * uy.data[i];
      float tol = 4 * std::abs(rhs) * std::numeric_limits<float>::epsilon() +
                  1e-6f;
      CHECK(std::abs(left.data[i] - rhs) <= tol);
    }
  }

  SUBCASE("backward matches finite differences") {
    Rng rng(31);
    auto x = random_tensor<double>(rng, 1, 1, 3, 3);
    auto mix = random_tensor<double>(rng, 1, 1, 6, 6);
    TensorT<double> gx = x.zeros_like();
    upsample_bilinear_backward(mix, 2, gx);
    auto loss = [&] {
      TensorT<double> up = upsample_bilinear_forward(x, 2);
      double acc = 0.0;
      for (std::size_t i = 0; i < up.size(); ++i)
        acc += up.data[i] * mix.data[i];
      return acc;
    };
    CHECK(gradcheck_sample(rng, x.data, gx.data, loss, 9) < 1e-4);
  }
}

TEST_CASE("sigmoid") {
  CHECK(sigmoid_scalar(0.0f) == doctest::Approx(0.5f));
  // Saturation stays finite and inside (0, 1).
  float lo = sigmoid_scalar(-120.0f), hi = sigmoid_scalar(120.0f);
  CHECK(std::isfinite(lo));
  CHECK(lo >= 0.0f);
  CHECK(hi <= 1.0f);
  CHECK(lo < 1e-30f);

  // sigma'(0) = 0.25 against a central difference.
  auto f = [](double v) { return sigmoid_scalar(v); };
  double fd = (f(1e-5) - f(-1e-5)) / 2e-5;
  CHECK(rel_err(fd, 0.25) < 1e-4);
}

TEST_CASE("concat channels") {
  Rng rng(9);
  auto a = random_tensor<float>(rng, 1, 2, 3, 3);
  auto b = random_tensor<float>(rng, 1, 3, 3, 3);
  std::vector<const Tensor*> xs{&a, &b};

  SUBCASE("identity order") {
    std::vector<int> perm{0, 1, 2, 3, 4};
    Tensor out = concat_channels_forward(xs, permutation_layout(xs, perm));
    CHECK(out.c == 5);
    for (int i = 0; i < 9; ++i)
      CHECK(out.plane(0, 3)[i] == b.plane(0, 1)[i]);
  }

  SUBCASE("reversing two single-channel inputs") {
    auto u = random_tensor<float>(rng, 1, 1, 2, 2);
    auto v = random_tensor<float>(rng, 1, 1, 2, 2);
    std::vector<const Tensor*> uv{&u, &v};
    Tensor out = concat_channels_forward(uv, permutation_layout(uv, {1, 0}));
    for (int i = 0; i < 4; ++i) {
      CHECK(out.plane(0, 0)[i] == v.plane(0, 0)[i]);
      CHECK(out.plane(0, 1)[i] == u.plane(0, 0)[i]);
    }
  }

  SUBCASE("random permutation round-trips bitwise") {
    std::vector<int> perm{3, 0, 4, 1, 2};
    Tensor cat = concat_channels_forward(xs, permutation_layout(xs, perm));
    // Invert: source flat channel perm[oc] lives at output channel oc.
    std::vector<int> inverse(5);
    for (int oc = 0; oc < 5; ++oc) inverse[perm[oc]] = oc;
    std::vector<const Tensor*> cs{&cat};
    Tensor back = concat_channels_forward(cs, permutation_layout(cs, inverse));
    const float* flat[5] = {a.plane(0, 0), a.plane(0, 1), b.plane(0, 0),
                            b.plane(0, 1), b.plane(0, 2)};
    for (int c = 0; c < 5; ++c)
      for (int i = 0; i < 9; ++i)
        CHECK(back.plane(0, c)[i] == flat[c][i]);
  }

  SUBCASE("backward routes gradients by the same permutation") {
    std::vector<int> perm{4, 2, 0, 3, 1};
    auto layout = permutation_layout(xs, perm);
    auto gout = random_tensor<float>(rng, 1, 5, 3, 3);
    Tensor ga = a.zeros_like(), gb = b.zeros_like();
    std::vector<Tensor*> gxs{&ga, &gb};
    concat_channels_backward(gout, layout, gxs);
    const float* gflat[5] = {ga.plane(0, 0), ga.plane(0, 1), gb.plane(0, 0),
                             gb.plane(0, 1), gb.plane(0, 2)};
    for (int oc = 0; oc < 5; ++oc)
      for (int i = 0; i < 9; ++i)
        CHECK(gflat[perm[oc]][i] == gout.plane(0, oc)[i]);
  }

  SUBCASE("spatial mismatch rejected") {
    Tensor c(1, 1, 4, 4);
    std::vector<const Tensor*> bad{&a, &c};
    CHECK_THROWS_AS(
        concat_channels_forward(bad, permutation_layout(bad, {0, 1, 2})),
        ConfigError);
  }
}

namespace {

ParameterT<float> scalar_param(float v) {
  ParameterT<float> p;
  p.set_shape(1, 1, 1, 1);
  p.value.data[0] = v;
  return p;
}

}  // namespace

TEST_CASE("sgd step semantics") {
  SUBCASE("vanilla step") {
    auto p = scalar_param(5.0f);
    SgdT<float> opt({&p}, {0.0f, 0.0f, 1});
    p.grad.data[0] = 2.0f;
    opt.note_accumulation();
    opt.step(0.1f);
    CHECK(p.value.data[0] == doctest::Approx(5.0f - 0.1f * 2.0f));
    CHECK(p.grad.data[0] == 0.0f);
  }

  SUBCASE("accumulation averages over iter_size") {
    auto p = scalar_param(1.0f);
    SgdT<float> opt({&p}, {0.0f, 0.0f, 2});
    p.grad.data[0] += 1.0f;  // g
    opt.note_accumulation();
    p.grad.data[0] += 3.0f;  // 3g
    opt.note_accumulation();
    opt.step(0.5f);
    CHECK(p.value.data[0] == doctest::Approx(1.0f - 0.5f * 2.0f));
  }

  SUBCASE("decay-only multiplies by (1 - lr*wd)") {
    auto p = scalar_param(2.0f);
    SgdT<float> opt({&p}, {0.0f, 0.0005f, 1});
    float expected = 2.0f;
    for (int i = 0; i < 3; ++i) {
      opt.note_accumulation();
      opt.step(0.1f);
      expected *= 1.0f - 0.1f * 0.0005f;
      CHECK(p.value.data[0] == doctest::Approx(expected));
    }
  }

  SUBCASE("stepping early is a usage error") {
    auto p = scalar_param(0.0f);
    SgdT<float> opt({&p}, {0.9f, 0.0005f, 10});
    opt.note_accumulation();
    CHECK_THROWS_AS(opt.step(0.1f), ConfigError);
  }

  SUBCASE("momentum accumulates") {
    auto p = scalar_param(0.0f);
    SgdT<float> opt({&p}, {0.9f, 0.0f, 1});
    for (int i = 0; i < 2; ++i) {
      p.grad.data[0] = 1.0f;
      opt.note_accumulation();
      opt.step(1.0f);
    }
    // step1: accum=1, v=-1; step2: accum=0.9+1=1.9, v=-2.9
    CHECK(p.value.data[0] == doctest::Approx(-2.9f));
  }
}

TEST_CASE("graph forward rejects non-finite outputs") {
  GraphT<float> g;
  int in = g.add_node(std::make_unique<InputNode<float>>(), {}, "in");
  g.mark_output("y", in);
  Tensor x(1, 1, 2, 2);
  x.data[3] = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(g.forward(x), NumericError);
}
