#include "sedge/labels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "sedge/bench.hpp"
#include "sedge/serialize.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace sedge {

namespace {

// Maps a seg id to its edge channel; -1 when the id has none (background
// under the default convention).
inline int channel_of(int id, bool background_is_class) {
  return background_is_class ? id : id - 1;
}

void validate_ids(const SegMap& seg, int k, bool background_is_class) {
  const int max_id = background_is_class ? k - 1 : k;
  for (uint8_t id : seg.ids)
    check_data(id <= max_id, "seg map id " + std::to_string(id) +
                                 " out of range for k=" + std::to_string(k));
}

}  // namespace

EdgeLabelStack seg_to_training_edges(const SegMap& seg, int radius, int k,
                                     bool background_is_class) {
  check_config(radius >= 1, "training edges: radius must be >= 1");
  check_config(k >= 1, "training edges: k must be >= 1");
  validate_ids(seg, k, background_is_class);
  EdgeLabelStack out(k, seg.h, seg.w);
  for (int y = 0; y < seg.h; ++y) {
    for (int x = 0; x < seg.w; ++x) {
      const int c = seg.at(y, x);
      const int y1 = std::min(seg.h - 1, y + radius);
      const int x1 = std::min(seg.w - 1, x + radius);
      for (int qy = std::max(0, y - radius); qy <= y1; ++qy) {
        for (int qx = std::max(0, x - radius); qx <= x1; ++qx) {
          const int cq = seg.at(qy, qx);
          if (cq == c) continue;
          int ch = channel_of(c, background_is_class);
          if (ch >= 0) out.at(ch, y, x) = 1;
          ch = channel_of(cq, background_is_class);
          if (ch >= 0) out.at(ch, y, x) = 1;
        }
      }
    }
  }
  return out;
}

EdgeLabelStack seg_to_eval_boundaries(const SegMap& seg, int k,
                                      bool background_is_class) {
  check_config(k >= 1, "eval boundaries: k must be >= 1");
  validate_ids(seg, k, background_is_class);
  EdgeLabelStack out(k, seg.h, seg.w);
  for (int y = 0; y < seg.h; ++y) {
    for (int x = 0; x < seg.w; ++x) {
      const int c = seg.at(y, x);
      const int ch = channel_of(c, background_is_class);
      if (ch < 0) continue;
      bool boundary = (y > 0 && seg.at(y - 1, x) != c) ||
                      (y + 1 < seg.h && seg.at(y + 1, x) != c) ||
                      (x > 0 && seg.at(y, x - 1) != c) ||
                      (x + 1 < seg.w && seg.at(y, x + 1) != c);
      if (boundary) out.at(ch, y, x) = 1;
    }
  }
  for (int ch = 0; ch < k; ++ch) {
    BinaryMap thinned = thin(out.channel(ch));
    std::copy(thinned.v.begin(), thinned.v.end(), out.plane(ch));
  }
  return out;
}

SegMap seg_to_multiclass_edges(const SegMap& seg, int radius, int k,
                               bool background_is_class) {
  check_config(radius >= 1 && k >= 1, "multiclass edges: bad radius/k");
  validate_ids(seg, k, background_is_class);
  SegMap out(seg.h, seg.w);
  for (int y = 0; y < seg.h; ++y) {
    for (int x = 0; x < seg.w; ++x) {
      const int c = seg.at(y, x);
      int own = channel_of(c, background_is_class);
      // Nearest differing neighbor that owns a channel; expanding Chebyshev
      // rings with smallest-id tie break keep the assignment deterministic.
      int found = -1;
      for (int r = 1; r <= radius && found < 0; ++r) {
        int best = -1;
        for (int qy = std::max(0, y - r);
             qy <= std::min(seg.h - 1, y + r); ++qy) {
          for (int qx = std::max(0, x - r);
               qx <= std::min(seg.w - 1, x + r); ++qx) {
            if (std::max(std::abs(qy - y), std::abs(qx - x)) != r) continue;
            const int cq = seg.at(qy, qx);
            if (cq == c) continue;
            if (own >= 0) {
              best = own;  // edge pixel takes its own region's class
              break;
            }
            int ch = channel_of(cq, background_is_class);
            if (ch >= 0 && (best < 0 || ch < best)) best = ch;
          }
          if (best >= 0 && own >= 0) break;
        }
        found = best;
      }
      if (found >= 0) out.at(y, x) = static_cast<uint8_t>(found + 1);
    }
  }
  return out;
}

BinaryMap collapse_any(const EdgeLabelStack& stack) {
  BinaryMap out(stack.h, stack.w);
  for (int ch = 0; ch < stack.k; ++ch) {
    const uint8_t* p = stack.plane(ch);
    for (size_t i = 0; i < out.v.size(); ++i) out.v[i] |= (p[i] != 0);
  }
  return out;
}

BinaryMap or_pool_half(const BinaryMap& m) {
  BinaryMap out((m.h + 1) / 2, (m.w + 1) / 2);
  for (int y = 0; y < m.h; ++y)
    for (int x = 0; x < m.w; ++x)
      if (m.at(y, x)) out.at(y / 2, x / 2) = 1;
  return out;
}

EdgeLabelStack or_pool_half(const EdgeLabelStack& stack) {
  EdgeLabelStack out(stack.k, (stack.h + 1) / 2, (stack.w + 1) / 2);
  for (int ch = 0; ch < stack.k; ++ch)
    for (int y = 0; y < stack.h; ++y)
      for (int x = 0; x < stack.w; ++x)
        if (stack.at(ch, y, x)) out.at(ch, y / 2, x / 2) = 1;
  return out;
}

Tensor bilinear_half(const Tensor& probs) {
  const int oh = (probs.h + 1) / 2, ow = (probs.w + 1) / 2;
  Tensor out(probs.n, probs.c, oh, ow);
  const double sy = static_cast<double>(probs.h) / oh;
  const double sx = static_cast<double>(probs.w) / ow;
  for (int in = 0; in < probs.n; ++in) {
    for (int ic = 0; ic < probs.c; ++ic) {
      const float* src = probs.plane(in, ic);
      float* dst = out.plane(in, ic);
      for (int oy = 0; oy < oh; ++oy) {
        double fy = (oy + 0.5) * sy - 0.5;
        int y0 = static_cast<int>(std::floor(fy));
        double wy = fy - y0;
        int ya = std::clamp(y0, 0, probs.h - 1);
        int yb = std::clamp(y0 + 1, 0, probs.h - 1);
        for (int ox = 0; ox < ow; ++ox) {
          double fx = (ox + 0.5) * sx - 0.5;
          int x0 = static_cast<int>(std::floor(fx));
          double wx = fx - x0;
          int xa = std::clamp(x0, 0, probs.w - 1);
          int xb = std::clamp(x0 + 1, 0, probs.w - 1);
          double top = src[static_cast<size_t>(ya) * probs.w + xa] * (1 - wx) +
                       src[static_cast<size_t>(ya) * probs.w + xb] * wx;
          double bot = src[static_cast<size_t>(yb) * probs.w + xa] * (1 - wx) +
                       src[static_cast<size_t>(yb) * probs.w + xb] * wx;
          dst[static_cast<size_t>(oy) * ow + ox] =
              static_cast<float>(top * (1 - wy) + bot * wy);
        }
      }
    }
  }
  return out;
}

CropMirror draw_crop_mirror(Rng& rng, int h, int w, int crop_h, int crop_w,
                            bool mirror_enabled) {
  check_config(crop_h >= 1 && crop_w >= 1 && crop_h <= h && crop_w <= w,
               "augment: crop " + std::to_string(crop_h) + "x" +
                   std::to_string(crop_w) + " exceeds image " +
                   std::to_string(h) + "x" + std::to_string(w));
  CropMirror cm;
  cm.crop_h = crop_h;
  cm.crop_w = crop_w;
  cm.y0 = rng.next_int(0, h - crop_h);
  cm.x0 = rng.next_int(0, w - crop_w);
  cm.mirrored = mirror_enabled && rng.next_bool();
  return cm;
}

namespace {
inline int src_x(const CropMirror& cm, int x) {
  return cm.mirrored ? cm.x0 + cm.crop_w - 1 - x : cm.x0 + x;
}
}  // namespace

Tensor apply_crop_mirror(const Tensor& image, const CropMirror& cm) {
  Tensor out(image.n, image.c, cm.crop_h, cm.crop_w);
  for (int in = 0; in < image.n; ++in)
    for (int ic = 0; ic < image.c; ++ic)
      for (int y = 0; y < cm.crop_h; ++y)
        for (int x = 0; x < cm.crop_w; ++x)
          out.at(in, ic, y, x) = image.at(in, ic, cm.y0 + y, src_x(cm, x));
  return out;
}

EdgeLabelStack apply_crop_mirror(const EdgeLabelStack& stack,
                                 const CropMirror& cm) {
  EdgeLabelStack out(stack.k, cm.crop_h, cm.crop_w);
  for (int ch = 0; ch < stack.k; ++ch)
    for (int y = 0; y < cm.crop_h; ++y)
      for (int x = 0; x < cm.crop_w; ++x)
        out.at(ch, y, x) = stack.at(ch, cm.y0 + y, src_x(cm, x));
  return out;
}

SegMap apply_crop_mirror(const SegMap& seg, const CropMirror& cm) {
  SegMap out(cm.crop_h, cm.crop_w);
  for (int y = 0; y < cm.crop_h; ++y)
    for (int x = 0; x < cm.crop_w; ++x)
      out.at(y, x) = seg.at(cm.y0 + y, src_x(cm, x));
  return out;
}

std::pair<Tensor, EdgeLabelStack> augment(Rng& rng, const Tensor& image,
                                          const EdgeLabelStack& stack,
                                          bool mirror_enabled, int crop_h,
                                          int crop_w) {
  check_config(image.h == stack.h && image.w == stack.w,
               "augment: image and labels disagree on size");
  CropMirror cm =
      draw_crop_mirror(rng, image.h, image.w, crop_h, crop_w, mirror_enabled);
  return {apply_crop_mirror(image, cm), apply_crop_mirror(stack, cm)};
}

// --- synthetic dataset -------------------------------------------------

namespace {

struct ShapeBounds {
  int min_half = 3;
  int max_half;
};

void paint_rect(SegMap& seg, Rng& rng, int cls, const ShapeBounds& b) {
  int cy = rng.next_int(0, seg.h - 1);
  int cx = rng.next_int(0, seg.w - 1);
  int a = rng.next_int(b.min_half, b.max_half);
  int bb = rng.next_int(b.min_half, b.max_half);
  for (int y = std::max(0, cy - bb); y <= std::min(seg.h - 1, cy + bb); ++y)
    for (int x = std::max(0, cx - a); x <= std::min(seg.w - 1, cx + a); ++x)
      seg.at(y, x) = static_cast<uint8_t>(cls);
}

void paint_ellipse(SegMap& seg, Rng& rng, int cls, const ShapeBounds& b) {
  int cy = rng.next_int(0, seg.h - 1);
  int cx = rng.next_int(0, seg.w - 1);
  long long a = rng.next_int(b.min_half, b.max_half);
  long long bb = rng.next_int(b.min_half, b.max_half);
  for (int y = std::max<int>(0, cy - static_cast<int>(bb));
       y <= std::min<int>(seg.h - 1, cy + static_cast<int>(bb)); ++y) {
    for (int x = std::max<int>(0, cx - static_cast<int>(a));
         x <= std::min<int>(seg.w - 1, cx + static_cast<int>(a)); ++x) {
      long long dx = x - cx, dy = y - cy;
      if (dx * dx * bb * bb + dy * dy * a * a <= a * a * bb * bb)
        seg.at(y, x) = static_cast<uint8_t>(cls);
    }
  }
}

void paint_triangle(SegMap& seg, Rng& rng, int cls) {
  // Redraw degenerate triangles a few times; give up quietly if unlucky.
  for (int attempt = 0; attempt < 8; ++attempt) {
    int x0 = rng.next_int(0, seg.w - 1), y0 = rng.next_int(0, seg.h - 1);
    int x1 = rng.next_int(0, seg.w - 1), y1 = rng.next_int(0, seg.h - 1);
    int x2 = rng.next_int(0, seg.w - 1), y2 = rng.next_int(0, seg.h - 1);
    long long cross = static_cast<long long>(x1 - x0) * (y2 - y0) -
                      static_cast<long long>(y1 - y0) * (x2 - x0);
    if (std::abs(cross) < 120) continue;  // area >= 60 px
    int ylo = std::max(0, std::min({y0, y1, y2}));
    int yhi = std::min(seg.h - 1, std::max({y0, y1, y2}));
    int xlo = std::max(0, std::min({x0, x1, x2}));
    int xhi = std::min(seg.w - 1, std::max({x0, x1, x2}));
    for (int y = ylo; y <= yhi; ++y) {
      for (int x = xlo; x <= xhi; ++x) {
        long long e0 = static_cast<long long>(x1 - x0) * (y - y0) -
                       static_cast<long long>(y1 - y0) * (x - x0);
        long long e1 = static_cast<long long>(x2 - x1) * (y - y1) -
                       static_cast<long long>(y2 - y1) * (x - x1);
        long long e2 = static_cast<long long>(x0 - x2) * (y - y2) -
                       static_cast<long long>(y0 - y2) * (x - x2);
        bool inside = (e0 >= 0 && e1 >= 0 && e2 >= 0) ||
                      (e0 <= 0 && e1 <= 0 && e2 <= 0);
        if (inside) seg.at(y, x) = static_cast<uint8_t>(cls);
      }
    }
    return;
  }
}

const uint8_t kPalette[9][3] = {
    {90, 90, 90},    // background
    {200, 60, 60},  {60, 200, 60},  {70, 70, 220},
    {210, 210, 60}, {200, 70, 200}, {60, 200, 200},
    {230, 150, 60}, {150, 60, 230},
};

const uint8_t* class_color(int id) {
  return id == 0 ? kPalette[0] : kPalette[1 + (id - 1) % 8];
}

}  // namespace

SegMap synth_seg_image(const SyntheticSpec& spec, int index) {
  check_config(spec.k >= 2, "synthetic: k must be >= 2");
  Rng rng = Rng(spec.seed).split(spec.index_offset + index).split(0);
  SegMap seg(spec.h, spec.w);
  ShapeBounds bounds{3, std::max(4, std::min(spec.h, spec.w) / 4)};
  for (int s = 0; s < spec.shapes_per_image; ++s) {
    int cls = rng.next_int(1, spec.k);
    int type = rng.next_int(0, 2);
    if (type == 0) paint_rect(seg, rng, cls, bounds);
    else if (type == 1) paint_ellipse(seg, rng, cls, bounds);
    else paint_triangle(seg, rng, cls);
  }
  return seg;
}

RGBImage synth_render_image(const SyntheticSpec& spec, int index,
                            const SegMap& seg) {
  Rng rng = Rng(spec.seed).split(spec.index_offset + index).split(1);
  RGBImage img(seg.h, seg.w);
  for (int y = 0; y < seg.h; ++y) {
    for (int x = 0; x < seg.w; ++x) {
      const uint8_t* base = class_color(seg.at(y, x));
      uint8_t* px = img.px(y, x);
      for (int ch = 0; ch < 3; ++ch) {
        double v = base[ch] + spec.noise_sigma * rng.next_gaussian();
        px[ch] = static_cast<uint8_t>(std::clamp<long>(std::lround(v), 0, 255));
      }
    }
  }
  return img;
}

DatasetManifest gen_synthetic(const SyntheticSpec& spec,
                              const std::string& out_dir,
                              const std::string& split) {
  check_config(spec.k >= 2, "synthetic: k must be >= 2");
  check_config(spec.n_images >= 0, "synthetic: n_images must be >= 0");
  fs::create_directories(out_dir);
  DatasetManifest m;
  m.split = split;
  m.k = spec.k;
  for (int c = 1; c <= spec.k; ++c)
    m.classes.push_back("class" + std::to_string(c));
  char buf[64];
  for (int i = 0; i < spec.n_images; ++i) {
    SegMap seg = synth_seg_image(spec, i);
    RGBImage img = synth_render_image(spec, i, seg);
    std::snprintf(buf, sizeof(buf), "img_%05d.ppm", i);
    std::string img_name = buf;
    std::snprintf(buf, sizeof(buf), "seg_%05d.pgm", i);
    std::string seg_name = buf;
    write_ppm((fs::path(out_dir) / img_name).string(), img);
    Gray8 g8(seg.h, seg.w);
    g8.v = seg.ids;
    write_pgm((fs::path(out_dir) / seg_name).string(), g8);
    m.pairs.push_back({img_name, seg_name});
  }
  return m;
}

void save_manifest(const DatasetManifest& m, const std::string& path) {
  json j;
  j["split"] = m.split;
  j["k"] = m.k;
  j["classes"] = m.classes;
  j["pairs"] = json::array();
  for (const auto& p : m.pairs)
    j["pairs"].push_back({{"image", p.image}, {"seg", p.seg}});
  std::ofstream os(path, std::ios::binary);
  check_data(os.good(), "cannot write manifest: " + path);
  os << j.dump(2) << "\n";
}

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream is(path);
  check_data(is.good(), "cannot open manifest: " + path);
  json j;
  try {
    is >> j;
  } catch (const json::parse_error& e) {
    throw DataError("malformed manifest " + path + ": " + e.what());
  }
  DatasetManifest m;
  check_data(j.contains("k") && j.contains("pairs"),
             "manifest missing required keys: " + path);
  m.split = j.value("split", "");
  m.k = j["k"].get<int>();
  check_data(m.k >= 1, "manifest k must be >= 1: " + path);
  if (j.contains("classes"))
    m.classes = j["classes"].get<std::vector<std::string>>();
  for (const auto& p : j["pairs"])
    m.pairs.push_back({p.at("image").get<std::string>(),
                       p.at("seg").get<std::string>()});
  return m;
}

std::string manifest_relative(const std::string& manifest_path,
                              const std::string& entry) {
  fs::path e(entry);
  if (e.is_absolute()) return entry;
  return (fs::path(manifest_path).parent_path() / e).string();
}

namespace {
constexpr char kLabelMagic[4] = {'S', 'E', 'D', 'L'};
}

void write_label_stack(const std::string& path, const EdgeLabelStack& stack) {
  std::ofstream os(path, std::ios::binary);
  check_data(os.good(), "cannot write label stack: " + path);
  os.write(kLabelMagic, 4);
  bin::put_u16(os, 1);
  bin::put_u16(os, static_cast<uint16_t>(stack.k));
  bin::put_u32(os, static_cast<uint32_t>(stack.h));
  bin::put_u32(os, static_cast<uint32_t>(stack.w));
  os.write(reinterpret_cast<const char*>(stack.data.data()),
           static_cast<std::streamsize>(stack.data.size()));
  check_data(os.good(), "failed writing label stack: " + path);
}

EdgeLabelStack read_label_stack(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  check_data(is.good(), "cannot open label stack: " + path);
  bin::expect_magic(is, kLabelMagic, "SEDL label stack");
  uint16_t version = bin::get_u16(is);
  check_data(version == 1, "unsupported label stack version");
  int k = bin::get_u16(is);
  int h = static_cast<int>(bin::get_u32(is));
  int w = static_cast<int>(bin::get_u32(is));
  EdgeLabelStack stack(k, h, w);
  is.read(reinterpret_cast<char*>(stack.data.data()),
          static_cast<std::streamsize>(stack.data.size()));
  check_data(static_cast<size_t>(is.gcount()) == stack.data.size(),
             "truncated label stack: " + path);
  for (uint8_t b : stack.data)
    check_data(b <= 1, "label stack values must be 0/1: " + path);
  return stack;
}

std::string label_stack_path_for(const std::string& seg_path) {
  fs::path p(seg_path);
  if (p.extension() == ".pgm") p.replace_extension(".sedl");
  else p += ".sedl";
  return p.string();
}

Tensor image_to_tensor(const RGBImage& img) {
  Tensor t(1, 3, img.h, img.w);
  for (int ch = 0; ch < 3; ++ch) {
    float* dst = t.plane(0, ch);
    for (int y = 0; y < img.h; ++y)
      for (int x = 0; x < img.w; ++x)
        dst[static_cast<size_t>(y) * img.w + x] =
            static_cast<float>(img.px(y, x)[ch]) / 255.0f - 0.5f;
  }
  return t;
}

}  // namespace sedge
