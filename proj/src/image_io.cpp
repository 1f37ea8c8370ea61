#include "sedge/image_io.hpp"

#include <cctype>
#include <fstream>

#include "sedge/error.hpp"

namespace sedge {

namespace {

// Reads one PNM header token, skipping whitespace and '#' comments.
int read_pnm_int(std::istream& is, const std::string& path) {
  int ch = is.get();
  while (ch != EOF) {
    if (ch == '#') {
      while (ch != EOF && ch != '\n') ch = is.get();
    } else if (std::isspace(ch)) {
      ch = is.get();
    } else {
      break;
    }
  }
  check_data(ch != EOF && std::isdigit(ch), "malformed PNM header: " + path);
  int value = 0;
  while (ch != EOF && std::isdigit(ch)) {
    value = value * 10 + (ch - '0');
    ch = is.get();
  }
  return value;
}

void read_pnm_payload(std::istream& is, uint8_t* dst, size_t count,
                      const std::string& path) {
  is.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(count));
  check_data(static_cast<size_t>(is.gcount()) == count,
             "truncated PNM payload: " + path);
}

}  // namespace

void write_pgm(const std::string& path, const Gray8& img) {
  std::ofstream os(path, std::ios::binary);
  check_data(os.good(), "cannot open for writing: " + path);
  os << "P5\n" << img.w << " " << img.h << "\n255\n";
  os.write(reinterpret_cast<const char*>(img.v.data()),
           static_cast<std::streamsize>(img.v.size()));
  check_data(os.good(), "failed writing PGM: " + path);
}

Gray8 read_pgm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  check_data(is.good(), "cannot open: " + path);
  char p, five;
  is.get(p);
  is.get(five);
  check_data(p == 'P' && five == '5', "not a P5 PGM: " + path);
  int w = read_pnm_int(is, path);
  int h = read_pnm_int(is, path);
  int maxval = read_pnm_int(is, path);
  check_data(maxval == 255, "PGM maxval must be 255: " + path);
  Gray8 img(h, w);
  read_pnm_payload(is, img.v.data(), img.v.size(), path);
  return img;
}

void write_ppm(const std::string& path, const RGBImage& img) {
  std::ofstream os(path, std::ios::binary);
  check_data(os.good(), "cannot open for writing: " + path);
  os << "P6\n" << img.w << " " << img.h << "\n255\n";
  os.write(reinterpret_cast<const char*>(img.rgb.data()),
           static_cast<std::streamsize>(img.rgb.size()));
  check_data(os.good(), "failed writing PPM: " + path);
}

RGBImage read_ppm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  check_data(is.good(), "cannot open: " + path);
  char p, six;
  is.get(p);
  is.get(six);
  check_data(p == 'P' && six == '6', "not a P6 PPM: " + path);
  int w = read_pnm_int(is, path);
  int h = read_pnm_int(is, path);
  int maxval = read_pnm_int(is, path);
  check_data(maxval == 255, "PPM maxval must be 255: " + path);
  RGBImage img(h, w);
  read_pnm_payload(is, img.rgb.data(), img.rgb.size(), path);
  return img;
}

}  // namespace sedge
