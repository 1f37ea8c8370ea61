#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "sedge/arch.hpp"
#include "sedge/bench.hpp"
#include "sedge/labels.hpp"

namespace sedge {

// Everything a run needs, loadable from JSON with per-field CLI overrides.
struct RunConfig {
  std::string variant = "casenet";
  int k = 3;
  std::string loss = "multilabel";  // "softmax" selects the baseline head
  std::array<int, 5> stage_channels{16, 32, 64, 128, 128};
  int blocks_per_stage = 1;

  double lr = 1e-4;
  double momentum = 0.9;
  double weight_decay = 0.0005;
  int iter_size = 10;
  int max_steps = 300;
  int lr_step_size = 0;  // 0 -> decay after 2/3 of max_steps
  double lr_gamma = 0.1;
  long long seed = -1;  // mandatory for train / gen-data

  int crop_h = 48, crop_w = 48;
  bool mirror = true;
  int label_radius = 2;

  std::string train_manifest;
  std::string test_manifest;

  double tolerance = 0.02;  // max match distance as a fraction of diagonal
  int thresholds = 99;
  bool halve = false;

  int checkpoint_every = 0;  // 0 -> final checkpoint only
  int log_window = 50;
  std::string out_dir = "run";

  NetworkDef network_def() const;
};

RunConfig load_run_config(const std::string& path);
std::string config_to_json_string(const RunConfig& cfg);

struct GenDataArgs {
  std::string out_dir;
  long long seed = -1;
  int n_train = 200;
  int n_test = 50;
  int h = 64, w = 64;
  int k = 3;
  int shapes_per_image = 4;
  double noise_sigma = 8.0;
  bool force = false;
};

// Writes out_dir/train and out_dir/test, each with images, seg maps and a
// manifest.json. Refuses to reuse a non-empty directory unless force.
void cmd_gen_data(const GenDataArgs& args);

// Builds the training edge stack for every pair of the manifest and stores
// it next to the seg map (seg_x.pgm -> seg_x.sedl). Returns files written.
int cmd_make_labels(const std::string& manifest_path, int radius,
                    int expected_k = 0);

struct TrainResult {
  std::string checkpoint;
  double final_total_loss = 0.0;
};

TrainResult cmd_train(const RunConfig& cfg);

void cmd_predict(const std::string& checkpoint, const std::string& manifest,
                 const std::string& out_dir, int threads = 1);

// Runs one image through a network, reflect-padding the input so the
// backbone strides divide it, and returns per-class probabilities at the
// original resolution.
Tensor predict_probs(Network& net, const Tensor& image);

std::string prediction_path_for(const std::string& out_dir,
                                const std::string& image_entry);

struct EvalArgs {
  std::string pred_dir;
  std::string gt_manifest;
  double tolerance = 0.02;
  int thresholds = 99;
  bool halve = false;
  int threads = 1;
  std::string report_json;  // optional output paths
  std::string report_txt;
  std::string csv;
  std::optional<RunConfig> config_echo;
};

EvalReport cmd_eval(const EvalArgs& args);

std::string report_to_json_string(const EvalReport& rep, const EvalArgs& args);
std::string report_to_text(const EvalReport& rep);
std::string report_to_csv(const PRTable& table,
                          const std::vector<std::string>& names);

struct VizArgs {
  std::string mode = "hsv";  // hsv | overlay | per-class-gray
  std::string pred;          // SEDP file (modes needing predictions)
  std::string seg;           // PGM seg map (ground truth modes / overlay)
  int k = 0;                 // required with --seg
  std::string out;           // output path; multi-file modes add suffixes
  bool top2 = false;
  double threshold = 0.5;    // overlay binarization
};

std::vector<std::string> cmd_viz(const VizArgs& args);

}  // namespace sedge
