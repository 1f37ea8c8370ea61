#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sedge/arch.hpp"
#include "sedge/bench.hpp"
#include "sedge/loss.hpp"
#include "sedge/pipeline.hpp"
#include "sedge/prediction_io.hpp"
#include "sedge/viz.hpp"

namespace py = pybind11;
using namespace sedge;

namespace {

using U8Array = py::array_t<uint8_t, py::array::c_style | py::array::forcecast>;
using F32Array = py::array_t<float, py::array::c_style | py::array::forcecast>;

SegMap to_seg(const U8Array& a) {
  if (a.ndim() != 2) throw ConfigError("expected a (H, W) uint8 array");
  SegMap seg(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), seg.ids.begin());
  return seg;
}

BinaryMap to_binary(const U8Array& a) {
  if (a.ndim() != 2) throw ConfigError("expected a (H, W) uint8 array");
  BinaryMap m(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
  for (py::ssize_t i = 0; i < a.size(); ++i) m.v[i] = a.data()[i] ? 1 : 0;
  return m;
}

EdgeLabelStack to_stack(const U8Array& a) {
  if (a.ndim() != 3) throw ConfigError("expected a (K, H, W) uint8 array");
  EdgeLabelStack s(static_cast<int>(a.shape(0)),
                   static_cast<int>(a.shape(1)),
                   static_cast<int>(a.shape(2)));
  for (py::ssize_t i = 0; i < a.size(); ++i) s.data[i] = a.data()[i] ? 1 : 0;
  return s;
}

Tensor to_tensor(const F32Array& a) {
  if (a.ndim() == 3) {
    Tensor t(1, static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)),
             static_cast<int>(a.shape(2)));
    std::copy(a.data(), a.data() + a.size(), t.data.begin());
    return t;
  }
  if (a.ndim() == 4 && a.shape(0) == 1) {
    Tensor t(1, static_cast<int>(a.shape(1)), static_cast<int>(a.shape(2)),
             static_cast<int>(a.shape(3)));
    std::copy(a.data(), a.data() + a.size(), t.data.begin());
    return t;
  }
  throw ConfigError("expected a (K, H, W) or (1, K, H, W) float array");
}

py::array from_tensor(const Tensor& t) {
  py::array_t<float> out({t.c, t.h, t.w});
  std::copy(t.data.begin(), t.data.end(), out.mutable_data());
  return out;
}

py::array from_stack(const EdgeLabelStack& s) {
  py::array_t<uint8_t> out({s.k, s.h, s.w});
  std::copy(s.data.begin(), s.data.end(), out.mutable_data());
  return out;
}

py::array from_binary(const BinaryMap& m) {
  py::array_t<uint8_t> out({m.h, m.w});
  std::copy(m.v.begin(), m.v.end(), out.mutable_data());
  return out;
}

py::array from_rgb(const RGBImage& img) {
  py::array_t<uint8_t> out({img.h, img.w, 3});
  std::copy(img.rgb.begin(), img.rgb.end(), out.mutable_data());
  return out;
}

HueTable hues_or_default(const std::optional<std::vector<double>>& hues,
                         int k) {
  if (hues) {
    check_config(static_cast<int>(hues->size()) == k,
                 "hue table size must equal the number of classes");
    return HueTable{*hues};
  }
  return k == 19 ? cityscapes_hue_table() : uniform_hue_table(k);
}

// Thin Python-facing wrapper around a built network.
class PyNetwork {
 public:
  PyNetwork(Network net) : net_(std::move(net)) {}

  static PyNetwork build(const std::string& variant, int k, uint64_t seed,
                         std::vector<int> stage_channels,
                         int blocks_per_stage, const std::string& loss) {
    NetworkDef def;
    def.variant = variant_from_name(variant);
    def.num_classes = k;
    if (loss == "softmax") def.head = HeadKind::kSoftmax;
    else
      check_config(loss == "multilabel",
                   "loss must be 'multilabel' or 'softmax'");
    check_config(stage_channels.size() == 5,
                 "stage_channels needs 5 entries");
    std::copy(stage_channels.begin(), stage_channels.end(),
              def.backbone.stage_channels.begin());
    def.backbone.blocks_per_stage = blocks_per_stage;
    return PyNetwork(build_network<float>(def, seed));
  }

  static PyNetwork load(const std::string& path) {
    return PyNetwork(load_checkpoint(path));
  }

  void save(const std::string& path) const { save_checkpoint(net_, path); }

  py::dict forward(const F32Array& image) {
    net_.forward(to_tensor(image));
    py::dict out;
    for (const auto& [name, id] : net_.graph.outputs())
      out[py::str(name)] = from_tensor(net_.graph.node(id).out);
    return out;
  }

  py::array predict_probs(const F32Array& image) {
    Tensor t = to_tensor(image);
    return from_tensor(sedge::predict_probs(net_, t));
  }

  std::string variant() const { return variant_name(net_.def.variant); }
  int num_classes() const { return net_.def.num_classes; }

 private:
  Network net_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Category-aware semantic edge detection: network, labels, "
            "benchmark and visualization primitives";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_IOError);
  py::register_exception<NumericError>(m, "NumericError",
                                       PyExc_ArithmeticError);

  // labels
  m.def(
      "seg_to_training_edges",
      [](const U8Array& seg, int k, int radius, bool background_is_class) {
        return from_stack(
            seg_to_training_edges(to_seg(seg), radius, k, background_is_class));
      },
      py::arg("seg"), py::arg("k"), py::arg("radius") = 2,
      py::arg("background_is_class") = false,
      "Multi-label training edge stack from a segmentation map.");
  m.def(
      "seg_to_eval_boundaries",
      [](const U8Array& seg, int k, bool background_is_class) {
        return from_stack(
            seg_to_eval_boundaries(to_seg(seg), k, background_is_class));
      },
      py::arg("seg"), py::arg("k"), py::arg("background_is_class") = false,
      "Single-pixel evaluation boundaries per class.");
  m.def(
      "seg_to_multiclass_edges",
      [](const U8Array& seg, int k, int radius) {
        SegMap mc = seg_to_multiclass_edges(to_seg(seg), radius, k);
        Gray8 g(mc.h, mc.w);
        g.v = mc.ids;
        py::array_t<uint8_t> out({g.h, g.w});
        std::copy(g.v.begin(), g.v.end(), out.mutable_data());
        return out;
      },
      py::arg("seg"), py::arg("k"), py::arg("radius") = 2);

  // losses
  m.def(
      "compute_beta",
      [](const U8Array& gt) { return compute_beta(to_stack(gt)); },
      py::arg("gt"), "1 - edge fraction over all K maps.");
  m.def(
      "multilabel_loss",
      [](const F32Array& act, const U8Array& gt,
         std::optional<double> beta) {
        EdgeLabelStack stack = to_stack(gt);
        double b = beta ? *beta : compute_beta(stack);
        auto lg = multilabel_loss(to_tensor(act), stack, b);
        return py::make_tuple(lg.value, from_tensor(lg.grad));
      },
      py::arg("activations"), py::arg("gt"), py::arg("beta") = py::none(),
      "Reweighted multi-label loss and its gradient w.r.t. activations.");
  m.def(
      "binary_edge_loss",
      [](const F32Array& act, const U8Array& gt_any,
         std::optional<double> beta) {
        BinaryMap any = to_binary(gt_any);
        double b = beta ? *beta : compute_beta_binary(any);
        auto lg = binary_edge_loss(to_tensor(act), any, b);
        return py::make_tuple(lg.value, from_tensor(lg.grad));
      },
      py::arg("activations"), py::arg("gt_any"), py::arg("beta") = py::none());
  m.def(
      "reweighted_softmax_loss",
      [](const F32Array& act, const U8Array& labels,
         std::optional<double> beta) {
        SegMap gt = to_seg(labels);
        double b = beta ? *beta : compute_beta_multiclass(gt);
        auto lg = reweighted_softmax_loss(to_tensor(act), gt, b);
        return py::make_tuple(lg.value, from_tensor(lg.grad));
      },
      py::arg("activations"), py::arg("labels"), py::arg("beta") = py::none());

  // benchmark
  m.def(
      "thin", [](const U8Array& m_) { return from_binary(thin(to_binary(m_))); },
      py::arg("binary"), "Zhang-Suen skeleton, run to convergence.");
  m.def(
      "match",
      [](const U8Array& pred, const U8Array& gt, double max_dist) {
        MatchResult r = match_boundaries(to_binary(pred), to_binary(gt),
                                         max_dist);
        py::dict out;
        out["tp"] = r.tp;
        out["fp"] = r.fp;
        out["fn"] = r.fn;
        return out;
      },
      py::arg("pred"), py::arg("gt"), py::arg("max_dist"),
      "Maximum-cardinality one-to-one boundary matching.");
  m.def("uniform_thresholds", &uniform_thresholds, py::arg("count"));
  m.def(
      "evaluate",
      [](const std::vector<F32Array>& probs, const std::vector<U8Array>& segs,
         int k, double tolerance, int thresholds, bool halve) {
        check_config(probs.size() == segs.size(),
                     "evaluate: probs and segs must pair up");
        PrAccumulator acc(k, uniform_thresholds(thresholds), tolerance,
                          halve);
        for (size_t i = 0; i < probs.size(); ++i)
          acc.add_image(to_tensor(probs[i]),
                        seg_to_eval_boundaries(to_seg(segs[i]), k));
        std::vector<std::string> names;
        for (int c = 1; c <= k; ++c)
          names.push_back("class" + std::to_string(c));
        EvalReport rep = summarize(acc.table(), names, tolerance, halve);
        py::dict out;
        py::list classes;
        for (size_t i = 0; i < rep.classes.size(); ++i) {
          py::dict c;
          c["name"] = rep.class_names[i];
          c["mf"] = rep.classes[i].mf;
          c["ods_threshold"] = rep.classes[i].ods_threshold;
          c["ap"] = rep.classes[i].ap;
          c["gt_count"] = rep.classes[i].gt_count;
          c["included"] = rep.classes[i].included;
          classes.append(c);
        }
        out["classes"] = classes;
        out["mean_mf"] = rep.mean_mf;
        out["mean_ap"] = rep.mean_ap;
        return out;
      },
      py::arg("probs"), py::arg("segs"), py::arg("k"),
      py::arg("tolerance") = 0.02, py::arg("thresholds") = 99,
      py::arg("halve") = false,
      "MF(ODS) and AP over per-image probability maps and seg maps.");

  // visualization
  m.def("cityscapes_hue_table",
        [] { return cityscapes_hue_table().degrees; });
  m.def("cityscapes_class_names",
        [] { return cityscapes_class_names(); });
  m.def(
      "hsv_to_rgb",
      [](double h, double s, double v) {
        auto rgb = hsv_to_rgb(h, s, v);
        return py::make_tuple(rgb[0], rgb[1], rgb[2]);
      },
      py::arg("h"), py::arg("s"), py::arg("v"));
  m.def(
      "encode_hsv",
      [](const F32Array& probs, std::optional<std::vector<double>> hues,
         bool top2_threshold) {
        Tensor t = to_tensor(probs);
        return from_rgb(
            encode_hsv(t, hues_or_default(hues, t.c), top2_threshold));
      },
      py::arg("probs"), py::arg("hues") = py::none(),
      py::arg("top2_threshold") = false,
      "Multi-label HSV edge coloring (hue mix / max saturation).");
  m.def(
      "tp_fp_overlay",
      [](const U8Array& pred, const U8Array& gt) {
        return from_rgb(tp_fp_overlay(to_binary(pred), to_binary(gt)));
      },
      py::arg("pred"), py::arg("gt"));

  // dataset + files
  m.def(
      "gen_synthetic",
      [](const std::string& out_dir, uint64_t seed, int n_images, int h,
         int w, int k, int shapes_per_image, double noise_sigma,
         const std::string& split, int index_offset) {
        SyntheticSpec spec;
        spec.seed = seed;
        spec.n_images = n_images;
        spec.h = h;
        spec.w = w;
        spec.k = k;
        spec.shapes_per_image = shapes_per_image;
        spec.noise_sigma = noise_sigma;
        spec.index_offset = index_offset;
        DatasetManifest m_ = gen_synthetic(spec, out_dir, split);
        std::string path = out_dir + "/manifest.json";
        save_manifest(m_, path);
        return path;
      },
      py::arg("out_dir"), py::arg("seed"), py::arg("n_images") = 4,
      py::arg("h") = 64, py::arg("w") = 64, py::arg("k") = 3,
      py::arg("shapes_per_image") = 4, py::arg("noise_sigma") = 8.0,
      py::arg("split") = "train", py::arg("index_offset") = 0,
      "Writes a synthetic shape dataset and returns the manifest path.");
  m.def("read_prediction",
        [](const std::string& path) { return from_tensor(read_prediction(path)); });
  m.def("write_prediction", [](const std::string& path, const F32Array& probs) {
    write_prediction(path, to_tensor(probs));
  });

  // network
  py::class_<PyNetwork>(m, "Network")
      .def_static("build", &PyNetwork::build, py::arg("variant"),
                  py::arg("k"), py::arg("seed"),
                  py::arg("stage_channels") =
                      std::vector<int>{16, 32, 64, 128, 128},
                  py::arg("blocks_per_stage") = 1,
                  py::arg("loss") = "multilabel")
      .def_static("load", &PyNetwork::load, py::arg("path"))
      .def("save", &PyNetwork::save, py::arg("path"))
      .def("forward", &PyNetwork::forward, py::arg("image"),
           "All named outputs (pre-sigmoid activations) for one image.")
      .def("predict_probs", &PyNetwork::predict_probs, py::arg("image"),
           "Fused per-class probabilities, padded/cropped as needed.")
      .def_property_readonly("variant", &PyNetwork::variant)
      .def_property_readonly("num_classes", &PyNetwork::num_classes);
}
