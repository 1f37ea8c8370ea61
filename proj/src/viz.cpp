#include "sedge/viz.hpp"

#include <algorithm>
#include <cmath>

namespace sedge {

HueTable cityscapes_hue_table() {
  return {{359, 320, 40, 80, 90, 10, 20, 30, 140, 340,
           280, 330, 350, 120, 110, 130, 150, 160, 170}};
}

const std::vector<std::string>& cityscapes_class_names() {
  static const std::vector<std::string> names = {
      "road",         "sidewalk", "building",   "wall",   "fence",
      "pole",         "traffic light", "traffic sign", "vegetation",
      "terrain",      "sky",      "person",     "rider",  "car",
      "truck",        "bus",      "train",      "motorcycle", "bicycle"};
  return names;
}

HueTable uniform_hue_table(int k) {
  check_config(k >= 1, "hue table: k must be >= 1");
  HueTable t;
  t.degrees.resize(k);
  for (int i = 0; i < k; ++i) t.degrees[i] = 360.0 * i / k;
  return t;
}

std::array<uint8_t, 3> hsv_to_rgb(double h, double s, double v) {
  check_config(h >= 0.0 && h < 360.0, "hsv: hue out of [0,360)");
  const double sv = std::clamp(s, 0.0, 255.0) / 255.0;
  const double vv = std::clamp(v, 0.0, 255.0) / 255.0;
  const double hh = h / 60.0;
  const int sector = static_cast<int>(hh) % 6;
  const double f = hh - static_cast<int>(hh);
  const double p = vv * (1.0 - sv);
  const double q = vv * (1.0 - f * sv);
  const double t = vv * (1.0 - (1.0 - f) * sv);
  double r = 0, g = 0, b = 0;
  switch (sector) {
    case 0: r = vv; g = t; b = p; break;
    case 1: r = q; g = vv; b = p; break;
    case 2: r = p; g = vv; b = t; break;
    case 3: r = p; g = q; b = vv; break;
    case 4: r = t; g = p; b = vv; break;
    case 5: r = vv; g = p; b = q; break;
  }
  auto byte = [](double x) {
    return static_cast<uint8_t>(std::lround(std::clamp(x, 0.0, 1.0) * 255.0));
  };
  return {byte(r), byte(g), byte(b)};
}

RGBImage encode_hsv(const Tensor& probs, const HueTable& hues,
                    bool top2_threshold) {
  check_config(probs.n == 1, "encode_hsv: expected a single image");
  check_config(hues.size() == probs.c,
               "encode_hsv: hue table size " + std::to_string(hues.size()) +
                   " != " + std::to_string(probs.c) + " classes");
  const int k = probs.c, h = probs.h, w = probs.w;
  RGBImage img(h, w);
  std::vector<double> y(k);
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (std::size_t i = 0; i < plane; ++i) {
    for (int c = 0; c < k; ++c) y[c] = probs.data[c * plane + i];
    if (top2_threshold) {
      for (double& v : y)
        if (v < 0.5) v = 0.0;
      // Keep only the two strongest survivors (lower index wins ties).
      int best = -1, second = -1;
      for (int c = 0; c < k; ++c) {
        if (y[c] <= 0.0) continue;
        if (best < 0 || y[c] > y[best]) {
          second = best;
          best = c;
        } else if (second < 0 || y[c] > y[second]) {
          second = c;
        }
      }
      for (int c = 0; c < k; ++c)
        if (c != best && c != second) y[c] = 0.0;
    }
    double sum = 0.0, weighted = 0.0, maxv = 0.0;
    for (int c = 0; c < k; ++c) {
      sum += y[c];
      weighted += y[c] * hues.degrees[c];
      maxv = std::max(maxv, y[c]);
    }
    double hue = sum > 0.0 ? weighted / sum : 0.0;
    double sat = sum > 0.0 ? 255.0 * maxv : 0.0;
    if (hue >= 360.0) hue = 0.0;  // only reachable through rounding
    auto rgb = hsv_to_rgb(hue, sat, 255.0);
    uint8_t* px = &img.rgb[i * 3];
    px[0] = rgb[0];
    px[1] = rgb[1];
    px[2] = rgb[2];
  }
  return img;
}

RGBImage tp_fp_overlay(const BinaryMap& pred, const BinaryMap& gt) {
  check_data(pred.h == gt.h && pred.w == gt.w,
             "overlay: prediction and ground truth sizes differ");
  RGBImage img(pred.h, pred.w);
  for (std::size_t i = 0; i < pred.v.size(); ++i) {
    uint8_t* px = &img.rgb[i * 3];
    const bool p = pred.v[i] != 0, g = gt.v[i] != 0;
    if (p && g) {
      px[0] = 0; px[1] = 255; px[2] = 0;        // true positive
    } else if (!p && g) {
      px[0] = 0; px[1] = 0; px[2] = 255;        // false negative
    } else if (p && !g) {
      px[0] = 255; px[1] = 0; px[2] = 0;        // false positive
    } else {
      px[0] = 255; px[1] = 255; px[2] = 255;    // true negative
    }
  }
  return img;
}

RGBImage prob_to_gray(const Tensor& probs, int klass) {
  check_config(probs.n == 1 && klass >= 0 && klass < probs.c,
               "gray: class index out of range");
  RGBImage img(probs.h, probs.w);
  const std::size_t plane = static_cast<std::size_t>(probs.h) * probs.w;
  const float* src = probs.data.data() + static_cast<std::size_t>(klass) * plane;
  for (std::size_t i = 0; i < plane; ++i) {
    double v = std::clamp(static_cast<double>(src[i]), 0.0, 1.0);
    uint8_t b = static_cast<uint8_t>(std::lround(v * 255.0));
    img.rgb[i * 3] = img.rgb[i * 3 + 1] = img.rgb[i * 3 + 2] = b;
  }
  return img;
}

}  // namespace sedge
