#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "sedge/viz.hpp"
#include "test_util.hpp"

using namespace sedge;

TEST_CASE("cityscapes hue table") {
  HueTable t = cityscapes_hue_table();
  REQUIRE(t.size() == 19);
  CHECK(t.degrees[0] == 359);   // road
  CHECK(t.degrees[10] == 280);  // sky
  CHECK(t.degrees[1] == 320);
  CHECK(t.degrees[18] == 170);
  const auto& names = cityscapes_class_names();
  REQUIRE(names.size() == 19);
  CHECK(names[0] == "road");
  CHECK(names[10] == "sky");
  CHECK(names[18] == "bicycle");
  for (double h : t.degrees) {
    CHECK(h >= 0);
    CHECK(h < 360);
  }
}

TEST_CASE("hsv to rgb conversion") {
  CHECK(hsv_to_rgb(0, 255, 255) == std::array<uint8_t, 3>{255, 0, 0});
  CHECK(hsv_to_rgb(120, 255, 255) == std::array<uint8_t, 3>{0, 255, 0});
  CHECK(hsv_to_rgb(240, 255, 255) == std::array<uint8_t, 3>{0, 0, 255});
  CHECK(hsv_to_rgb(77.3, 0, 255) == std::array<uint8_t, 3>{255, 255, 255});
  CHECK_THROWS_AS(hsv_to_rgb(360.0, 10, 10), ConfigError);
}

namespace {

Tensor probs_1px(const std::vector<float>& y) {
  Tensor t(1, static_cast<int>(y.size()), 1, 1);
  t.data.assign(y.begin(), y.end());
  return t;
}

std::array<uint8_t, 3> first_px(const RGBImage& img) {
  return {img.rgb[0], img.rgb[1], img.rgb[2]};
}

}  // namespace

TEST_CASE("hsv encoding") {
  SUBCASE("single active class takes its exact hue") {
    HueTable hues = cityscapes_hue_table();
    Tensor y(1, 19, 1, 1);
    y.data[0] = 1.0f;  // road, hue 359
    RGBImage img = encode_hsv(y, hues, false);
    CHECK(first_px(img) == hsv_to_rgb(359, 255, 255));
  }

  SUBCASE("two full responses mix hues linearly") {
    HueTable hues{{359, 320}};
    RGBImage img = encode_hsv(probs_1px({1.0f, 1.0f}), hues, false);
    CHECK(first_px(img) == hsv_to_rgb(339.5, 255, 255));
  }

  SUBCASE("zero response renders white") {
    HueTable hues{{10, 20, 30}};
    RGBImage img = encode_hsv(probs_1px({0, 0, 0}), hues, false);
    CHECK(first_px(img) == std::array<uint8_t, 3>{255, 255, 255});
  }

  SUBCASE("hue is scale-free for a single class, saturation is not") {
    // Magnitudes chosen exactly representable in binary floating point.
    HueTable hues{{80, 200}};
    for (float mag : {0.25f, 0.5f, 0.75f}) {
      RGBImage img = encode_hsv(probs_1px({0.0f, mag}), hues, false);
      CHECK(first_px(img) == hsv_to_rgb(200, 255.0 * mag, 255));
    }
  }

  SUBCASE("common scaling keeps hue, scales saturation") {
    HueTable hues{{40, 130, 310}};
    Tensor base = probs_1px({0.75f, 0.5f, 0.25f});
    const double hue =
        (0.75 * 40 + 0.5 * 130 + 0.25 * 310) / (0.75 + 0.5 + 0.25);
    RGBImage full = encode_hsv(base, hues, false);
    CHECK(first_px(full) == hsv_to_rgb(hue, 255 * 0.75, 255));
    Tensor half = probs_1px({0.375f, 0.25f, 0.125f});
    RGBImage scaled = encode_hsv(half, hues, false);
    CHECK(first_px(scaled) == hsv_to_rgb(hue, 255 * 0.375, 255));
  }

  SUBCASE("top-2 thresholding") {
    HueTable hues{{100, 200, 300}};
    // 0.25 falls below the 0.5 cut; of the survivors the two strongest are
    // kept, so class 0 (0.875) and class 2 (0.625) define the hue.
    Tensor y = probs_1px({0.875f, 0.25f, 0.625f});
    RGBImage img = encode_hsv(y, hues, true);
    const double hue = (0.875 * 100 + 0.625 * 300) / (0.875 + 0.625);
    CHECK(first_px(img) == hsv_to_rgb(hue, 255 * 0.875, 255));

    // All below threshold -> achromatic.
    RGBImage none = encode_hsv(probs_1px({0.2f, 0.3f, 0.49f}), hues, true);
    CHECK(first_px(none) == std::array<uint8_t, 3>{255, 255, 255});
  }
}

TEST_CASE("tp/fp overlay") {
  BinaryMap pred(2, 2), gt(2, 2);
  pred.at(0, 0) = 1;
  gt.at(0, 0) = 1;  // TP
  gt.at(0, 1) = 1;  // FN
  pred.at(1, 0) = 1;  // FP
  RGBImage img = tp_fp_overlay(pred, gt);
  auto px = [&](int y, int x) {
    const uint8_t* p = img.px(y, x);
    return std::array<uint8_t, 3>{p[0], p[1], p[2]};
  };
  CHECK(px(0, 0) == std::array<uint8_t, 3>{0, 255, 0});      // green
  CHECK(px(0, 1) == std::array<uint8_t, 3>{0, 0, 255});      // blue
  CHECK(px(1, 0) == std::array<uint8_t, 3>{255, 0, 0});      // red
  CHECK(px(1, 1) == std::array<uint8_t, 3>{255, 255, 255});  // white

  BinaryMap wrong(3, 2);
  CHECK_THROWS_AS(tp_fp_overlay(pred, wrong), DataError);
}

TEST_CASE("overlay partitions every pixel into exactly one color") {
  Rng rng(3);
  BinaryMap pred(9, 9), gt(9, 9);
  for (auto& v : pred.v) v = rng.next_double() < 0.4;
  for (auto& v : gt.v) v = rng.next_double() < 0.4;
  RGBImage img = tp_fp_overlay(pred, gt);
  for (int i = 0; i < 81; ++i) {
    std::array<uint8_t, 3> c{img.rgb[i * 3], img.rgb[i * 3 + 1],
                             img.rgb[i * 3 + 2]};
    bool known = c == std::array<uint8_t, 3>{0, 255, 0} ||
                 c == std::array<uint8_t, 3>{0, 0, 255} ||
                 c == std::array<uint8_t, 3>{255, 0, 0} ||
                 c == std::array<uint8_t, 3>{255, 255, 255};
    CHECK(known);
  }
}

TEST_CASE("ppm writer is bit-exact") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "sedge_viz_test";
  fs::create_directories(dir);
  RGBImage img(2, 3);
  for (size_t i = 0; i < img.rgb.size(); ++i)
    img.rgb[i] = static_cast<uint8_t>(i * 7);
  std::string path = (dir / "t.ppm").string();
  write_ppm(path, img);

  std::ifstream is(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(is)), {});
  std::string expect = "P6\n3 2\n255\n";
  for (size_t i = 0; i < img.rgb.size(); ++i)
    expect.push_back(static_cast<char>(img.rgb[i]));
  CHECK(bytes == expect);

  RGBImage back = read_ppm(path);
  CHECK(back.h == 2);
  CHECK(back.w == 3);
  CHECK(back.rgb == img.rgb);
}

TEST_CASE("per-class gray rendering") {
  Tensor probs(1, 2, 1, 2);
  probs.data = {0.0f, 1.0f, 0.5f, 2.0f};  // 2.0 clamps to 255
  RGBImage g0 = prob_to_gray(probs, 0);
  CHECK(g0.rgb[0] == 0);
  CHECK(g0.rgb[3] == 255);
  RGBImage g1 = prob_to_gray(probs, 1);
  CHECK(g1.rgb[0] == 128);
  CHECK(g1.rgb[3] == 255);
}
