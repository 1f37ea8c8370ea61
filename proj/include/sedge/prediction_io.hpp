#pragma once

#include <string>

#include "sedge/tensor.hpp"

namespace sedge {

// Prediction file ("SEDP"): magic, u16 version, u16 K, u32 H, u32 W, then
// K class-major row-major planes of little-endian f32 in [0,1]. Values are
// clamped to [0,1] on write; write/read round-trips bitwise.
void write_prediction(const std::string& path, const Tensor& probs);
Tensor read_prediction(const std::string& path);

}  // namespace sedge
