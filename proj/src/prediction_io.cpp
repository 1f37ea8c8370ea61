#include "sedge/prediction_io.hpp"

#include <algorithm>
#include <fstream>

#include "sedge/serialize.hpp"

namespace sedge {

namespace {
constexpr char kPredictionMagic[4] = {'S', 'E', 'D', 'P'};
constexpr uint16_t kPredictionVersion = 1;
}  // namespace

void write_prediction(const std::string& path, const Tensor& probs) {
  check_config(probs.n == 1, "prediction: expected a single image");
  std::ofstream os(path, std::ios::binary);
  check_data(os.good(), "cannot open prediction for writing: " + path);
  os.write(kPredictionMagic, 4);
  bin::put_u16(os, kPredictionVersion);
  bin::put_u16(os, static_cast<uint16_t>(probs.c));
  bin::put_u32(os, static_cast<uint32_t>(probs.h));
  bin::put_u32(os, static_cast<uint32_t>(probs.w));
  for (float v : probs.data) bin::put_f32(os, std::clamp(v, 0.0f, 1.0f));
  check_data(os.good(), "failed writing prediction: " + path);
}

Tensor read_prediction(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  check_data(is.good(), "cannot open prediction: " + path);
  bin::expect_magic(is, kPredictionMagic, "SEDP prediction");
  uint16_t version = bin::get_u16(is);
  check_data(version == kPredictionVersion,
             "unsupported prediction version " + std::to_string(version));
  int k = bin::get_u16(is);
  int h = static_cast<int>(bin::get_u32(is));
  int w = static_cast<int>(bin::get_u32(is));
  check_data(k >= 1 && h >= 1 && w >= 1, "corrupt prediction header: " + path);
  Tensor t(1, k, h, w);
  for (float& v : t.data) v = bin::get_f32(is);
  if (is.peek() != EOF) throw DataError("trailing bytes in prediction file");
  return t;
}

}  // namespace sedge
