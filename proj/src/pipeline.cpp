#include "sedge/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "sedge/loss.hpp"
#include "sedge/optim.hpp"
#include "sedge/prediction_io.hpp"
#include "sedge/viz.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace sedge {

NetworkDef RunConfig::network_def() const {
  NetworkDef def;
  def.variant = variant_from_name(variant);
  def.num_classes = k;
  if (loss == "softmax") def.head = HeadKind::kSoftmax;
  else
    check_config(loss == "multilabel",
                 "config: loss must be 'multilabel' or 'softmax'");
  def.backbone.stage_channels = stage_channels;
  def.backbone.blocks_per_stage = blocks_per_stage;
  return def;
}

namespace {

json config_json(const RunConfig& c) {
  json j;
  j["variant"] = c.variant;
  j["k"] = c.k;
  j["loss"] = c.loss;
  j["stage_channels"] = c.stage_channels;
  j["blocks_per_stage"] = c.blocks_per_stage;
  j["lr"] = c.lr;
  j["momentum"] = c.momentum;
  j["weight_decay"] = c.weight_decay;
  j["iter_size"] = c.iter_size;
  j["max_steps"] = c.max_steps;
  j["lr_step_size"] = c.lr_step_size;
  j["lr_gamma"] = c.lr_gamma;
  j["seed"] = c.seed;
  j["crop"] = {c.crop_h, c.crop_w};
  j["mirror"] = c.mirror;
  j["label_radius"] = c.label_radius;
  j["train_manifest"] = c.train_manifest;
  j["test_manifest"] = c.test_manifest;
  j["tolerance"] = c.tolerance;
  j["thresholds"] = c.thresholds;
  j["halve"] = c.halve;
  j["checkpoint_every"] = c.checkpoint_every;
  j["log_window"] = c.log_window;
  j["out_dir"] = c.out_dir;
  return j;
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path);
  check_config(is.good(), "cannot open config: " + path);
  json j;
  try {
    is >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("malformed config " + path + ": " + e.what());
  }
  RunConfig c;
  c.variant = j.value("variant", c.variant);
  c.k = j.value("k", c.k);
  c.loss = j.value("loss", c.loss);
  if (j.contains("stage_channels")) {
    auto v = j["stage_channels"].get<std::vector<int>>();
    check_config(v.size() == 5, "config: stage_channels needs 5 entries");
    std::copy(v.begin(), v.end(), c.stage_channels.begin());
  }
  c.blocks_per_stage = j.value("blocks_per_stage", c.blocks_per_stage);
  c.lr = j.value("lr", c.lr);
  c.momentum = j.value("momentum", c.momentum);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.iter_size = j.value("iter_size", c.iter_size);
  c.max_steps = j.value("max_steps", c.max_steps);
  c.lr_step_size = j.value("lr_step_size", c.lr_step_size);
  c.lr_gamma = j.value("lr_gamma", c.lr_gamma);
  c.seed = j.value("seed", c.seed);
  if (j.contains("crop")) {
    auto v = j["crop"].get<std::vector<int>>();
    check_config(v.size() == 2, "config: crop needs [h, w]");
    c.crop_h = v[0];
    c.crop_w = v[1];
  }
  c.mirror = j.value("mirror", c.mirror);
  c.label_radius = j.value("label_radius", c.label_radius);
  c.train_manifest = j.value("train_manifest", c.train_manifest);
  c.test_manifest = j.value("test_manifest", c.test_manifest);
  c.tolerance = j.value("tolerance", c.tolerance);
  c.thresholds = j.value("thresholds", c.thresholds);
  c.halve = j.value("halve", c.halve);
  c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
  c.log_window = j.value("log_window", c.log_window);
  c.out_dir = j.value("out_dir", c.out_dir);
  return c;
}

std::string config_to_json_string(const RunConfig& cfg) {
  return config_json(cfg).dump(2);
}

void cmd_gen_data(const GenDataArgs& args) {
  check_config(args.seed >= 0, "gen-data: --seed is required");
  check_config(args.k >= 2, "gen-data: k must be >= 2");
  fs::path root(args.out_dir);
  if (fs::exists(root) && !fs::is_empty(root) && !args.force)
    throw ConfigError("gen-data: output dir exists and is not empty (use "
                      "--force): " + args.out_dir);
  SyntheticSpec spec;
  spec.seed = static_cast<uint64_t>(args.seed);
  spec.h = args.h;
  spec.w = args.w;
  spec.k = args.k;
  spec.shapes_per_image = args.shapes_per_image;
  spec.noise_sigma = args.noise_sigma;

  spec.n_images = args.n_train;
  spec.index_offset = 0;
  DatasetManifest train =
      gen_synthetic(spec, (root / "train").string(), "train");
  save_manifest(train, (root / "train" / "manifest.json").string());

  spec.n_images = args.n_test;
  spec.index_offset = args.n_train;
  DatasetManifest test = gen_synthetic(spec, (root / "test").string(), "test");
  save_manifest(test, (root / "test" / "manifest.json").string());
}

int cmd_make_labels(const std::string& manifest_path, int radius,
                    int expected_k) {
  DatasetManifest m = load_manifest(manifest_path);
  if (expected_k > 0)
    check_config(m.k == expected_k, "make-labels: manifest k mismatch");
  int written = 0;
  for (const auto& pair : m.pairs) {
    std::string seg_path = manifest_relative(manifest_path, pair.seg);
    Gray8 g = read_pgm(seg_path);
    SegMap seg(g.h, g.w);
    seg.ids = g.v;
    EdgeLabelStack stack = seg_to_training_edges(seg, radius, m.k);
    write_label_stack(label_stack_path_for(seg_path), stack);
    ++written;
  }
  return written;
}

namespace {

struct TrainSample {
  std::string name;
  Tensor image;
  EdgeLabelStack stack;
  SegMap multiclass;  // only filled for the softmax baseline
};

std::vector<TrainSample> load_train_set(const RunConfig& cfg) {
  check_config(!cfg.train_manifest.empty(), "train: train_manifest not set");
  DatasetManifest m = load_manifest(cfg.train_manifest);
  check_config(m.k == cfg.k, "train: manifest has k=" + std::to_string(m.k) +
                                 " but config wants k=" +
                                 std::to_string(cfg.k));
  const bool softmax = cfg.loss == "softmax";
  std::vector<TrainSample> out;
  out.reserve(m.pairs.size());
  for (const auto& pair : m.pairs) {
    TrainSample s;
    s.name = pair.image;
    std::string img_path = manifest_relative(cfg.train_manifest, pair.image);
    std::string seg_path = manifest_relative(cfg.train_manifest, pair.seg);
    s.image = image_to_tensor(read_ppm(img_path));
    std::string lbl = label_stack_path_for(seg_path);
    check_data(fs::exists(lbl),
               "train: missing label stack " + lbl + " (run make-labels)");
    s.stack = read_label_stack(lbl);
    check_data(s.stack.k == cfg.k && s.stack.h == s.image.h &&
                   s.stack.w == s.image.w,
               "train: label stack/image mismatch for " + pair.image);
    if (softmax) {
      Gray8 g = read_pgm(seg_path);
      SegMap seg(g.h, g.w);
      seg.ids = g.v;
      s.multiclass = seg_to_multiclass_edges(seg, cfg.label_radius, cfg.k);
    }
    out.push_back(std::move(s));
  }
  check_config(!out.empty(), "train: empty dataset");
  return out;
}

void shuffle_order(std::vector<int>& order, Rng& rng) {
  for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
    std::swap(order[i], order[rng.next_int(0, i)]);
}

void dump_nan_diagnostic(const RunConfig& cfg, int step, int accumulation,
                         const std::string& sample, const CropMirror& cm,
                         const std::string& output) {
  json j;
  j["error"] = "non-finite loss";
  j["step"] = step;
  j["accumulation"] = accumulation;
  j["sample"] = sample;
  j["crop"] = {{"y0", cm.y0}, {"x0", cm.x0}, {"mirrored", cm.mirrored}};
  j["output"] = output;
  std::ofstream os(fs::path(cfg.out_dir) / "nan_dump.json");
  os << j.dump(2) << "\n";
}

}  // namespace

TrainResult cmd_train(const RunConfig& cfg) {
  check_config(cfg.seed >= 0, "train: seed is mandatory");
  check_config(cfg.max_steps >= 0, "train: max_steps must be >= 0");
  check_config(cfg.lr > 0 && cfg.lr_gamma > 0, "train: bad lr schedule");

  std::vector<TrainSample> samples = load_train_set(cfg);
  for (const auto& s : samples)
    check_config(cfg.crop_h <= s.image.h && cfg.crop_w <= s.image.w,
                 "train: crop exceeds image size for " + s.name);

  NetworkDef def = cfg.network_def();
  Network net = build_network<float>(def, static_cast<uint64_t>(cfg.seed));
  auto sup = supervised_outputs(def);

  SgdConfig scfg;
  scfg.momentum = static_cast<float>(cfg.momentum);
  scfg.weight_decay = static_cast<float>(cfg.weight_decay);
  scfg.iter_size = cfg.iter_size;
  Sgd sgd(net.graph.parameters(), scfg);

  Rng order_rng = Rng(static_cast<uint64_t>(cfg.seed)).split(0xdadau);
  Rng aug_rng = Rng(static_cast<uint64_t>(cfg.seed)).split(0xc0ffeeu);

  fs::create_directories(cfg.out_dir);
  std::ofstream log(fs::path(cfg.out_dir) / "train_log.jsonl",
                    std::ios::binary);
  check_data(log.good(), "train: cannot open train log");

  const int step_size = cfg.lr_step_size > 0
                            ? cfg.lr_step_size
                            : std::max(1, (cfg.max_steps * 2 + 2) / 3);

  std::vector<int> order(samples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  size_t cursor = order.size();

  std::map<std::string, std::deque<double>> windows;
  double final_total = 0.0;

  for (int step = 1; step <= cfg.max_steps; ++step) {
    std::map<std::string, double> sums;
    for (int acc = 0; acc < cfg.iter_size; ++acc) {
      if (cursor == order.size()) {
        shuffle_order(order, order_rng);
        cursor = 0;
      }
      const TrainSample& s = samples[order[cursor++]];
      CropMirror cm = draw_crop_mirror(aug_rng, s.image.h, s.image.w,
                                       cfg.crop_h, cfg.crop_w, cfg.mirror);
      Tensor img = apply_crop_mirror(s.image, cm);
      EdgeLabelStack stack = apply_crop_mirror(s.stack, cm);

      try {
        net.forward(img);
        const double beta = compute_beta(stack);
        for (const auto& so : sup) {
          LossGrad lg;
          switch (so.loss) {
            case LossKind::kMultiLabel:
              lg = multilabel_loss(net.output(so.output), stack, beta);
              break;
            case LossKind::kBinaryEdge: {
              BinaryMap any = collapse_any(stack);
              lg = binary_edge_loss(net.output(so.output), any,
                                    compute_beta_binary(any));
              break;
            }
            case LossKind::kSoftmax: {
              SegMap mc = apply_crop_mirror(s.multiclass, cm);
              lg = reweighted_softmax_loss(net.output(so.output), mc,
                                           compute_beta_multiclass(mc));
              break;
            }
          }
          net.graph.add_output_grad(so.output, lg.grad);
          sums[so.output] += lg.value;
        }
      } catch (const NumericError&) {
        dump_nan_diagnostic(cfg, step, acc, s.name, cm, "forward/loss");
        throw;
      }
      net.graph.backward();
      sgd.note_accumulation();
    }

    const double lr_now =
        cfg.lr * std::pow(cfg.lr_gamma, (step - 1) / step_size);
    sgd.step(static_cast<float>(lr_now));

    json line;
    line["step"] = step;
    line["lr"] = lr_now;
    json losses, averages;
    double total = 0.0;
    for (const auto& so : sup) {
      double v = sums[so.output] / cfg.iter_size;
      losses[so.output] = v;
      total += v;
      auto& win = windows[so.output];
      win.push_back(v);
      if (static_cast<int>(win.size()) > cfg.log_window) win.pop_front();
      double mean = 0.0;
      for (double x : win) mean += x;
      averages[so.output] = mean / win.size();
    }
    line["losses"] = losses;
    line["avg"] = averages;
    line["total"] = total;
    log << line.dump() << "\n";
    final_total = total;

    if (cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0) {
      char buf[48];
      std::snprintf(buf, sizeof(buf), "checkpoint_%06d.sedw", step);
      save_checkpoint(net, (fs::path(cfg.out_dir) / buf).string());
    }
  }

  TrainResult result;
  result.checkpoint = (fs::path(cfg.out_dir) / "checkpoint.sedw").string();
  result.final_total_loss = final_total;
  save_checkpoint(net, result.checkpoint);
  std::ofstream cfg_echo(fs::path(cfg.out_dir) / "config.json",
                         std::ios::binary);
  cfg_echo << config_to_json_string(cfg) << "\n";
  return result;
}

namespace {

inline int reflect_index(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}

Tensor pad_reflect_to_multiple(const Tensor& x, int multiple) {
  const int h8 = (x.h + multiple - 1) / multiple * multiple;
  const int w8 = (x.w + multiple - 1) / multiple * multiple;
  if (h8 == x.h && w8 == x.w) return x;
  Tensor out(x.n, x.c, h8, w8);
  for (int in = 0; in < x.n; ++in)
    for (int ic = 0; ic < x.c; ++ic)
      for (int y = 0; y < h8; ++y)
        for (int xx = 0; xx < w8; ++xx)
          out.at(in, ic, y, xx) =
              x.at(in, ic, reflect_index(y, x.h), reflect_index(xx, x.w));
  return out;
}

}  // namespace

Tensor predict_probs(Network& net, const Tensor& image) {
  check_config(image.n == 1 && image.c == net.def.backbone.input_channels,
               "predict: image channels do not match the network");
  Tensor padded = pad_reflect_to_multiple(image, 8);
  net.forward(padded);
  const Tensor& fused = net.output("fused");

  const int K = net.def.num_classes;
  Tensor probs(1, K, image.h, image.w);
  const std::size_t plane = static_cast<std::size_t>(image.h) * image.w;
  if (net.def.head == HeadKind::kSoftmax) {
    // Softmax over K+1 channels; drop the background channel.
    for (int y = 0; y < image.h; ++y) {
      for (int x = 0; x < image.w; ++x) {
        double m = -1e300;
        for (int c = 0; c < fused.c; ++c)
          m = std::max(m, static_cast<double>(fused.at(0, c, y, x)));
        double sum = 0.0;
        for (int c = 0; c < fused.c; ++c)
          sum += std::exp(static_cast<double>(fused.at(0, c, y, x)) - m);
        for (int c = 1; c < fused.c; ++c)
          probs.data[(c - 1) * plane + static_cast<std::size_t>(y) * image.w +
                     x] =
              static_cast<float>(
                  std::exp(static_cast<double>(fused.at(0, c, y, x)) - m) /
                  sum);
      }
    }
  } else {
    for (int c = 0; c < K; ++c)
      for (int y = 0; y < image.h; ++y)
        for (int x = 0; x < image.w; ++x)
          probs.data[c * plane + static_cast<std::size_t>(y) * image.w + x] =
              sigmoid_scalar(fused.at(0, c, y, x));
  }
  return probs;
}

std::string prediction_path_for(const std::string& out_dir,
                                const std::string& image_entry) {
  fs::path stem = fs::path(image_entry).stem();
  return (fs::path(out_dir) / (stem.string() + ".sedp")).string();
}

void cmd_predict(const std::string& checkpoint, const std::string& manifest,
                 const std::string& out_dir, int threads) {
  DatasetManifest m = load_manifest(manifest);
  fs::create_directories(out_dir);
  {
    Network probe = load_checkpoint(checkpoint);
    check_config(probe.def.num_classes == m.k,
                 "predict: checkpoint K=" +
                     std::to_string(probe.def.num_classes) +
                     " does not match manifest k=" + std::to_string(m.k));
  }
  const int n = static_cast<int>(m.pairs.size());
  const int nthreads = std::max(1, std::min(threads, n == 0 ? 1 : n));

  auto worker = [&](int tid) {
    Network net = load_checkpoint(checkpoint);  // graphs are not shareable
    for (int i = tid; i < n; i += nthreads) {
      Tensor img = image_to_tensor(
          read_ppm(manifest_relative(manifest, m.pairs[i].image)));
      Tensor probs = predict_probs(net, img);
      write_prediction(prediction_path_for(out_dir, m.pairs[i].image), probs);
    }
  };
  if (nthreads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
}

EvalReport cmd_eval(const EvalArgs& args) {
  DatasetManifest m = load_manifest(args.gt_manifest);
  std::vector<double> grid = uniform_thresholds(args.thresholds);
  PrAccumulator acc(m.k, grid, args.tolerance, args.halve);

  const int n = static_cast<int>(m.pairs.size());
  check_data(n > 0, "eval: empty manifest");
  std::vector<std::vector<std::vector<ThresholdCounts>>> per_image(n);
  std::vector<EdgeLabelStack> gts(n);

  const int nthreads = std::max(1, std::min(args.threads, n));
  auto worker = [&](int tid) {
    for (int i = tid; i < n; i += nthreads) {
      Gray8 g = read_pgm(manifest_relative(args.gt_manifest, m.pairs[i].seg));
      SegMap seg(g.h, g.w);
      seg.ids = g.v;
      gts[i] = seg_to_eval_boundaries(seg, m.k);
      Tensor probs = read_prediction(
          prediction_path_for(args.pred_dir, m.pairs[i].image));
      per_image[i] = pr_counts_for_image(probs, gts[i], grid, args.tolerance,
                                         args.halve);
    }
  };
  if (nthreads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  // Deterministic reduction in image order regardless of thread count.
  for (int i = 0; i < n; ++i) acc.add_counts(per_image[i], gts[i], args.halve);

  std::vector<std::string> names = m.classes;
  while (static_cast<int>(names.size()) < m.k)
    names.push_back("class" + std::to_string(names.size() + 1));
  EvalReport rep = summarize(acc.table(), names, args.tolerance, args.halve);

  if (!args.report_json.empty()) {
    std::ofstream os(args.report_json, std::ios::binary);
    check_data(os.good(), "eval: cannot write report " + args.report_json);
    os << report_to_json_string(rep, args) << "\n";
  }
  if (!args.report_txt.empty()) {
    std::ofstream os(args.report_txt, std::ios::binary);
    os << report_to_text(rep);
  }
  if (!args.csv.empty()) {
    std::ofstream os(args.csv, std::ios::binary);
    os << report_to_csv(acc.table(), names);
  }
  return rep;
}

std::string report_to_json_string(const EvalReport& rep,
                                  const EvalArgs& args) {
  json j;
  j["config"] = args.config_echo
                    ? json::parse(config_to_json_string(*args.config_echo))
                    : json(nullptr);
  j["eval"] = {{"gt_manifest", args.gt_manifest},
               {"pred_dir", args.pred_dir},
               {"tolerance", args.tolerance},
               {"threshold_count", args.thresholds},
               {"halve", args.halve}};
  json classes = json::array();
  json excluded = json::array();
  for (size_t i = 0; i < rep.classes.size(); ++i) {
    const auto& c = rep.classes[i];
    classes.push_back({{"name", rep.class_names[i]},
                       {"mf", c.mf},
                       {"ods_threshold", c.ods_threshold},
                       {"ap", c.ap},
                       {"gt_count", c.gt_count},
                       {"included", c.included}});
    if (!c.included) excluded.push_back(rep.class_names[i]);
  }
  j["classes"] = classes;
  j["excluded_classes"] = excluded;
  j["mean_mf"] = rep.mean_mf;
  j["mean_ap"] = rep.mean_ap;
  return j.dump(2);
}

std::string report_to_text(const EvalReport& rep) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-16s %8s %8s %8s %10s\n", "class",
                "MF(ODS)", "thr", "AP", "gt");
  os << buf;
  for (size_t i = 0; i < rep.classes.size(); ++i) {
    const auto& c = rep.classes[i];
    if (c.included) {
      std::snprintf(buf, sizeof(buf), "%-16s %8.4f %8.2f %8.4f %10lld\n",
                    rep.class_names[i].c_str(), c.mf, c.ods_threshold, c.ap,
                    c.gt_count);
    } else {
      std::snprintf(buf, sizeof(buf),
                    "%-16s %8s %8s %8s %10lld  (no ground truth; excluded)\n",
                    rep.class_names[i].c_str(), "-", "-", "-", c.gt_count);
    }
    os << buf;
  }
  std::snprintf(buf, sizeof(buf), "%-16s %8.4f %8s %8.4f\n", "mean",
                rep.mean_mf, "", rep.mean_ap);
  os << buf;
  std::snprintf(buf, sizeof(buf),
                "tolerance %.4g x diagonal, %zu thresholds, halve %s\n",
                rep.tolerance_frac, rep.thresholds.size(),
                rep.halve ? "on" : "off");
  os << buf;
  return os.str();
}

std::string report_to_csv(const PRTable& table,
                          const std::vector<std::string>& names) {
  std::ostringstream os;
  os << "class,threshold,tp,fp,fn,precision,recall\n";
  for (int k = 0; k < table.num_classes(); ++k) {
    for (size_t ti = 0; ti < table.thresholds.size(); ++ti) {
      const auto& c = table.per_class[k][ti];
      const double p = (c.tp + c.fp) == 0
                           ? 0.0
                           : static_cast<double>(c.tp) / (c.tp + c.fp);
      const double r = (c.tp + c.fn) == 0
                           ? 0.0
                           : static_cast<double>(c.tp) / (c.tp + c.fn);
      os << names[k] << "," << table.thresholds[ti] << "," << c.tp << ","
         << c.fp << "," << c.fn << "," << p << "," << r << "\n";
    }
  }
  return os.str();
}

namespace {

EdgeLabelStack gt_stack_from_seg(const std::string& seg_path, int k) {
  check_config(k >= 1, "viz: --k is required with --seg");
  Gray8 g = read_pgm(seg_path);
  SegMap seg(g.h, g.w);
  seg.ids = g.v;
  return seg_to_eval_boundaries(seg, k);
}

Tensor stack_to_probs(const EdgeLabelStack& stack) {
  Tensor t(1, stack.k, stack.h, stack.w);
  for (std::size_t i = 0; i < stack.data.size(); ++i)
    t.data[i] = stack.data[i] ? 1.0f : 0.0f;
  return t;
}

std::string with_suffix(const std::string& out, const std::string& suffix) {
  fs::path p(out);
  fs::path ext = p.extension();
  p.replace_extension();
  return p.string() + suffix + (ext.empty() ? ".ppm" : ext.string());
}

}  // namespace

std::vector<std::string> cmd_viz(const VizArgs& args) {
  std::vector<std::string> written;
  check_config(!args.out.empty(), "viz: --out is required");

  Tensor probs;
  if (!args.pred.empty()) {
    probs = read_prediction(args.pred);
  } else {
    check_config(!args.seg.empty(), "viz: need --pred or --seg");
    probs = stack_to_probs(gt_stack_from_seg(args.seg, args.k));
  }

  if (args.mode == "hsv") {
    HueTable hues = probs.c == 19 ? cityscapes_hue_table()
                                  : uniform_hue_table(probs.c);
    RGBImage img = encode_hsv(probs, hues, args.top2);
    write_ppm(args.out, img);
    written.push_back(args.out);
  } else if (args.mode == "overlay") {
    check_config(!args.pred.empty() && !args.seg.empty(),
                 "viz overlay: needs --pred and --seg");
    EdgeLabelStack gt = gt_stack_from_seg(args.seg, probs.c);
    check_data(gt.h == probs.h && gt.w == probs.w,
               "viz overlay: prediction/seg size mismatch");
    for (int c = 0; c < probs.c; ++c) {
      BinaryMap pred_bin(probs.h, probs.w);
      const float* plane = probs.plane(0, c);
      for (size_t i = 0; i < pred_bin.v.size(); ++i)
        pred_bin.v[i] = plane[i] >= args.threshold;
      RGBImage img = tp_fp_overlay(pred_bin, gt.channel(c));
      std::string path = probs.c == 1
                             ? args.out
                             : with_suffix(args.out,
                                           "_class" + std::to_string(c + 1));
      write_ppm(path, img);
      written.push_back(path);
    }
  } else if (args.mode == "per-class-gray") {
    for (int c = 0; c < probs.c; ++c) {
      RGBImage img = prob_to_gray(probs, c);
      std::string path = probs.c == 1
                             ? args.out
                             : with_suffix(args.out,
                                           "_class" + std::to_string(c + 1));
      write_ppm(path, img);
      written.push_back(path);
    }
  } else {
    throw ConfigError("viz: unknown mode '" + args.mode + "'");
  }
  return written;
}

}  // namespace sedge
