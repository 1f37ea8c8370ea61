#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sedge/error.hpp"
#include "sedge/image_io.hpp"
#include "sedge/rng.hpp"
#include "sedge/tensor.hpp"

namespace sedge {

// Per-pixel class ids. With the default convention id 0 is background and
// ids 1..K map to edge channels 0..K-1; background gets no channel of its
// own (pass background_is_class=true to give ids 0..K-1 one channel each).
struct SegMap {
  int h = 0, w = 0;
  std::vector<uint8_t> ids;

  SegMap() = default;
  SegMap(int h_, int w_) : h(h_), w(w_), ids(static_cast<size_t>(h_) * w_, 0) {}
  uint8_t& at(int y, int x) { return ids[static_cast<size_t>(y) * w + x]; }
  uint8_t at(int y, int x) const { return ids[static_cast<size_t>(y) * w + x]; }
};

struct BinaryMap {
  int h = 0, w = 0;
  std::vector<uint8_t> v;

  BinaryMap() = default;
  BinaryMap(int h_, int w_) : h(h_), w(w_), v(static_cast<size_t>(h_) * w_, 0) {}
  uint8_t& at(int y, int x) { return v[static_cast<size_t>(y) * w + x]; }
  uint8_t at(int y, int x) const { return v[static_cast<size_t>(y) * w + x]; }
  long long count() const {
    long long c = 0;
    for (uint8_t b : v) c += b != 0;
    return c;
  }
};

// K binary edge maps per image; maps of different classes may overlap.
struct EdgeLabelStack {
  int k = 0, h = 0, w = 0;
  std::vector<uint8_t> data;  // class-major

  EdgeLabelStack() = default;
  EdgeLabelStack(int k_, int h_, int w_)
      : k(k_), h(h_), w(w_),
        data(static_cast<size_t>(k_) * h_ * w_, 0) {}
  uint8_t& at(int ik, int y, int x) {
    return data[(static_cast<size_t>(ik) * h + y) * w + x];
  }
  uint8_t at(int ik, int y, int x) const {
    return data[(static_cast<size_t>(ik) * h + y) * w + x];
  }
  uint8_t* plane(int ik) { return data.data() + static_cast<size_t>(ik) * h * w; }
  const uint8_t* plane(int ik) const {
    return data.data() + static_cast<size_t>(ik) * h * w;
  }
  BinaryMap channel(int ik) const {
    BinaryMap m(h, w);
    std::copy(plane(ik), plane(ik) + static_cast<size_t>(h) * w, m.v.begin());
    return m;
  }
  long long count() const {
    long long c = 0;
    for (uint8_t b : data) c += b != 0;
    return c;
  }
};

struct DatasetManifest {
  struct Pair {
    std::string image;
    std::string seg;
  };
  std::string split;
  int k = 0;
  std::vector<std::string> classes;
  std::vector<Pair> pairs;
};

// Training labels: pixel p carries the edge label of class c when some
// pixel q within Chebyshev radius `radius` has seg(q) != seg(p) and c is
// one of {seg(p), seg(q)}. Both sides of a boundary are labeled for both
// adjacent classes, so a boundary band is 2*radius wide and multi-label.
EdgeLabelStack seg_to_training_edges(const SegMap& seg, int radius, int k,
                                     bool background_is_class = false);

// Evaluation boundaries: pixel p is a class-c boundary when seg(p) = c and
// some 4-neighbor differs. The per-class rims are then skeleton-thinned so
// the ground truth is strictly single-pixel wide.
EdgeLabelStack seg_to_eval_boundaries(const SegMap& seg, int k,
                                      bool background_is_class = false);

// Multi-class training labels for the softmax baseline: 0 for non-edge
// pixels, otherwise one class id in 1..k (non-overlapping by construction:
// an edge pixel takes its own region's class; background-side pixels of a
// band take the nearest differing class id in the window).
SegMap seg_to_multiclass_edges(const SegMap& seg, int radius, int k,
                               bool background_is_class = false);

BinaryMap collapse_any(const EdgeLabelStack& stack);

// Halving for the evaluation protocol: OR over each 2x2 cell for binary
// maps (keeps thin structures), bilinear for probability maps. Output is
// ceil(h/2) x ceil(w/2).
BinaryMap or_pool_half(const BinaryMap& m);
EdgeLabelStack or_pool_half(const EdgeLabelStack& stack);
Tensor bilinear_half(const Tensor& probs);

// --- augmentation -----------------------------------------------------

struct CropMirror {
  int y0 = 0, x0 = 0;
  int crop_h = 0, crop_w = 0;
  bool mirrored = false;
};

CropMirror draw_crop_mirror(Rng& rng, int h, int w, int crop_h, int crop_w,
                            bool mirror_enabled);
Tensor apply_crop_mirror(const Tensor& image, const CropMirror& cm);
EdgeLabelStack apply_crop_mirror(const EdgeLabelStack& stack,
                                 const CropMirror& cm);
SegMap apply_crop_mirror(const SegMap& seg, const CropMirror& cm);

// Draws one transform and applies it to the image and every label map.
std::pair<Tensor, EdgeLabelStack> augment(Rng& rng, const Tensor& image,
                                          const EdgeLabelStack& stack,
                                          bool mirror_enabled, int crop_h,
                                          int crop_w);

// --- synthetic dataset -------------------------------------------------

struct SyntheticSpec {
  uint64_t seed = 1;
  int n_images = 0;
  int h = 64, w = 64;
  int k = 3;                // number of shape classes (seg ids 1..k)
  int shapes_per_image = 4;
  double noise_sigma = 8.0;
  int index_offset = 0;  // global image index base, keeps splits independent
};

// Paints random rectangles / ellipses / triangles in z-order over a flat
// background and derives the paired SegMap. Per-image PRNG streams come
// from (seed, global index), so the dataset is byte-stable regardless of
// generation order.
SegMap synth_seg_image(const SyntheticSpec& spec, int index);
RGBImage synth_render_image(const SyntheticSpec& spec, int index,
                            const SegMap& seg);

// Writes images/segs under `out_dir` and returns the manifest (paths are
// relative to out_dir; the manifest JSON lives there too).
DatasetManifest gen_synthetic(const SyntheticSpec& spec,
                              const std::string& out_dir,
                              const std::string& split);

void save_manifest(const DatasetManifest& m, const std::string& path);
DatasetManifest load_manifest(const std::string& path);

// Resolves a manifest-relative path against the manifest's directory.
std::string manifest_relative(const std::string& manifest_path,
                              const std::string& entry);

// Label stack file ("SEDL"): header + k*h*w bytes of 0/1.
void write_label_stack(const std::string& path, const EdgeLabelStack& stack);
EdgeLabelStack read_label_stack(const std::string& path);

// Conventional on-disk location of the training label stack for a seg map.
std::string label_stack_path_for(const std::string& seg_path);

Tensor image_to_tensor(const RGBImage& img);  // bytes -> v/255 - 0.5

}  // namespace sedge
