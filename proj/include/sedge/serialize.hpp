#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "sedge/error.hpp"

// Little-endian binary primitives for the on-disk formats ("SEDW"
// checkpoints, "SEDP" predictions, "SEDL" label stacks).
namespace sedge::bin {

inline void put_u8(std::ostream& os, uint8_t v) {
  os.put(static_cast<char>(v));
}

inline void put_u16(std::ostream& os, uint16_t v) {
  put_u8(os, static_cast<uint8_t>(v & 0xff));
  put_u8(os, static_cast<uint8_t>(v >> 8));
}

inline void put_u32(std::ostream& os, uint32_t v) {
  put_u16(os, static_cast<uint16_t>(v & 0xffff));
  put_u16(os, static_cast<uint16_t>(v >> 16));
}

inline void put_f32(std::ostream& os, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  put_u32(os, bits);
}

inline uint8_t get_u8(std::istream& is) {
  int ch = is.get();
  if (ch == EOF) throw DataError("unexpected end of file");
  return static_cast<uint8_t>(ch);
}

inline uint16_t get_u16(std::istream& is) {
  uint16_t lo = get_u8(is);
  uint16_t hi = get_u8(is);
  return static_cast<uint16_t>(lo | (hi << 8));
}

inline uint32_t get_u32(std::istream& is) {
  uint32_t lo = get_u16(is);
  uint32_t hi = get_u16(is);
  return lo | (hi << 16);
}

inline float get_f32(std::istream& is) {
  uint32_t bits = get_u32(is);
  float v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

inline void expect_magic(std::istream& is, const char magic[4],
                         const std::string& what) {
  char buf[4];
  is.read(buf, 4);
  if (!is || std::memcmp(buf, magic, 4) != 0)
    throw DataError("bad magic: not a " + what + " file");
}

}  // namespace sedge::bin
