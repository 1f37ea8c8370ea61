#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sedge {

struct Gray8 {
  int h = 0, w = 0;
  std::vector<uint8_t> v;

  Gray8() = default;
  Gray8(int h_, int w_) : h(h_), w(w_), v(static_cast<size_t>(h_) * w_, 0) {}
  uint8_t& at(int y, int x) { return v[static_cast<size_t>(y) * w + x]; }
  uint8_t at(int y, int x) const { return v[static_cast<size_t>(y) * w + x]; }
};

struct RGBImage {
  int h = 0, w = 0;
  std::vector<uint8_t> rgb;  // h*w*3, row-major, interleaved

  RGBImage() = default;
  RGBImage(int h_, int w_)
      : h(h_), w(w_), rgb(static_cast<size_t>(h_) * w_ * 3, 0) {}
  uint8_t* px(int y, int x) {
    return rgb.data() + (static_cast<size_t>(y) * w + x) * 3;
  }
  const uint8_t* px(int y, int x) const {
    return rgb.data() + (static_cast<size_t>(y) * w + x) * 3;
  }
};

// Binary PGM (P5) / PPM (P6), maxval 255. The writers emit a canonical
// header so identical content gives identical bytes.
void write_pgm(const std::string& path, const Gray8& img);
Gray8 read_pgm(const std::string& path);
void write_ppm(const std::string& path, const RGBImage& img);
RGBImage read_ppm(const std::string& path);

}  // namespace sedge
