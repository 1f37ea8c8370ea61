#pragma once

#include <array>
#include <string>
#include <vector>

#include "sedge/image_io.hpp"
#include "sedge/labels.hpp"
#include "sedge/tensor.hpp"

namespace sedge {

// One hue per semantic class, degrees in [0, 360).
struct HueTable {
  std::vector<double> degrees;

  int size() const { return static_cast<int>(degrees.size()); }
};

// The hand-picked 19-class table for street scenes, paired with
// cityscapes_class_names().
HueTable cityscapes_hue_table();
const std::vector<std::string>& cityscapes_class_names();

// Evenly spaced fallback for other class counts.
HueTable uniform_hue_table(int k);

// Standard sectorwise conversion; h in degrees [0,360), s and v in 0..255.
std::array<uint8_t, 3> hsv_to_rgb(double h, double s, double v);

// Multi-label edge coloring: hue is the response-weighted mean of the class
// hues (computed literally as a plain weighted mean, no circular wrap),
// saturation is 255 * max response, value is 255. Pixels with zero total
// response render achromatic (S=0, H=0): white, since V stays 255.
// With top2_threshold set (test-result mode) responses below 0.5 are zeroed
// and only the two strongest surviving classes enter the hue mean.
RGBImage encode_hsv(const Tensor& probs, const HueTable& hues,
                    bool top2_threshold);

// Four-color comparison image: green = true positive, blue = false
// negative, red = false positive, white = true negative.
RGBImage tp_fp_overlay(const BinaryMap& pred, const BinaryMap& gt);

// One probability plane as an 8-bit gray PPM payload.
RGBImage prob_to_gray(const Tensor& probs, int klass);

}  // namespace sedge
