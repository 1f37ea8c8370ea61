#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sedge/pipeline.hpp"

namespace {

// Applies CLI overrides on top of --config (file values win over defaults,
// explicit flags win over the file).
struct TrainFlags {
  std::string config;
  sedge::RunConfig cfg;
};

void add_config_options(CLI::App* cmd, sedge::RunConfig& cfg,
                        std::string& config_path) {
  cmd->add_option("--config", config_path, "JSON config file");
  cmd->add_option("--variant", cfg.variant,
                  "basic | dsn | casenet | casenet- | casenet-edge");
  cmd->add_option("--k", cfg.k, "number of semantic classes");
  cmd->add_option("--loss", cfg.loss, "multilabel | softmax");
  cmd->add_option("--lr", cfg.lr, "base learning rate");
  cmd->add_option("--momentum", cfg.momentum, "SGD momentum");
  cmd->add_option("--weight-decay", cfg.weight_decay, "L2 weight decay");
  cmd->add_option("--iter-size", cfg.iter_size,
                  "gradient accumulations per update");
  cmd->add_option("--max-steps", cfg.max_steps, "optimizer updates to run");
  cmd->add_option("--lr-step-size", cfg.lr_step_size,
                  "steps between lr decays (0: 2/3 of max-steps)");
  cmd->add_option("--lr-gamma", cfg.lr_gamma, "lr decay factor");
  cmd->add_option("--seed", cfg.seed, "PRNG seed (required for train)");
  cmd->add_option("--crop-h", cfg.crop_h, "training crop height");
  cmd->add_option("--crop-w", cfg.crop_w, "training crop width");
  cmd->add_option("--mirror", cfg.mirror, "random horizontal mirroring");
  cmd->add_option("--label-radius", cfg.label_radius,
                  "training edge neighborhood radius");
  cmd->add_option("--train-manifest", cfg.train_manifest,
                  "training dataset manifest");
  cmd->add_option("--test-manifest", cfg.test_manifest,
                  "test dataset manifest");
  cmd->add_option("--tolerance", cfg.tolerance,
                  "match distance as a fraction of the image diagonal");
  cmd->add_option("--thresholds", cfg.thresholds, "threshold grid size");
  cmd->add_flag("--halve", cfg.halve, "evaluate at half resolution");
  cmd->add_option("--checkpoint-every", cfg.checkpoint_every,
                  "periodic checkpoint interval (0: final only)");
  cmd->add_option("--out-dir", cfg.out_dir, "run output directory");
}

sedge::RunConfig resolve_config(const CLI::App* cmd,
                                const std::string& config_path,
                                const sedge::RunConfig& flag_values) {
  if (config_path.empty()) return flag_values;
  sedge::RunConfig cfg = sedge::load_run_config(config_path);
  const sedge::RunConfig defaults;
  auto take = [&](const char* name, auto member) {
    if (cmd->count(name) > 0) cfg.*member = flag_values.*member;
  };
  take("--variant", &sedge::RunConfig::variant);
  take("--k", &sedge::RunConfig::k);
  take("--loss", &sedge::RunConfig::loss);
  take("--lr", &sedge::RunConfig::lr);
  take("--momentum", &sedge::RunConfig::momentum);
  take("--weight-decay", &sedge::RunConfig::weight_decay);
  take("--iter-size", &sedge::RunConfig::iter_size);
  take("--max-steps", &sedge::RunConfig::max_steps);
  take("--lr-step-size", &sedge::RunConfig::lr_step_size);
  take("--lr-gamma", &sedge::RunConfig::lr_gamma);
  take("--seed", &sedge::RunConfig::seed);
  take("--crop-h", &sedge::RunConfig::crop_h);
  take("--crop-w", &sedge::RunConfig::crop_w);
  take("--mirror", &sedge::RunConfig::mirror);
  take("--label-radius", &sedge::RunConfig::label_radius);
  take("--train-manifest", &sedge::RunConfig::train_manifest);
  take("--test-manifest", &sedge::RunConfig::test_manifest);
  take("--tolerance", &sedge::RunConfig::tolerance);
  take("--thresholds", &sedge::RunConfig::thresholds);
  take("--halve", &sedge::RunConfig::halve);
  take("--checkpoint-every", &sedge::RunConfig::checkpoint_every);
  take("--out-dir", &sedge::RunConfig::out_dir);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Category-aware semantic edge detection toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 1;
  app.add_option("--threads", threads, "worker threads for predict/eval");

  // gen-data
  sedge::GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "generate a synthetic dataset");
  gen_cmd->add_option("--out", gen.out_dir, "output directory")->required();
  gen_cmd->add_option("--seed", gen.seed, "dataset seed")->required();
  gen_cmd->add_option("--train", gen.n_train, "training images");
  gen_cmd->add_option("--test", gen.n_test, "test images");
  gen_cmd->add_option("--height", gen.h, "image height");
  gen_cmd->add_option("--width", gen.w, "image width");
  gen_cmd->add_option("--k", gen.k, "number of shape classes");
  gen_cmd->add_option("--shapes", gen.shapes_per_image, "shapes per image");
  gen_cmd->add_option("--noise", gen.noise_sigma, "pixel noise sigma");
  gen_cmd->add_flag("--force", gen.force, "overwrite a non-empty directory");

  // make-labels
  std::string ml_manifest;
  int ml_radius = 2;
  auto* ml_cmd =
      app.add_subcommand("make-labels", "build training edge label stacks");
  ml_cmd->add_option("--manifest", ml_manifest, "dataset manifest")
      ->required();
  ml_cmd->add_option("--radius", ml_radius, "neighborhood radius");

  // train
  sedge::RunConfig train_cfg;
  std::string train_config_path;
  auto* train_cmd = app.add_subcommand("train", "train a network");
  add_config_options(train_cmd, train_cfg, train_config_path);

  // predict
  std::string pr_checkpoint, pr_manifest, pr_out;
  auto* pr_cmd =
      app.add_subcommand("predict", "write per-class edge probabilities");
  pr_cmd->add_option("--checkpoint", pr_checkpoint, "trained checkpoint")
      ->required();
  pr_cmd->add_option("--manifest", pr_manifest, "dataset manifest")
      ->required();
  pr_cmd->add_option("--out", pr_out, "prediction output directory")
      ->required();

  // eval
  sedge::RunConfig eval_cfg;
  std::string eval_config_path;
  std::string ev_pred, ev_manifest, ev_json, ev_txt, ev_csv;
  auto* ev_cmd = app.add_subcommand("eval", "benchmark predictions");
  ev_cmd->add_option("--pred", ev_pred, "prediction directory")->required();
  ev_cmd->add_option("--manifest", ev_manifest, "ground-truth manifest")
      ->required();
  ev_cmd->add_option("--report-json", ev_json, "JSON report path");
  ev_cmd->add_option("--report-txt", ev_txt, "text report path");
  ev_cmd->add_option("--csv", ev_csv, "raw PR point CSV path");
  add_config_options(ev_cmd, eval_cfg, eval_config_path);

  // viz
  sedge::VizArgs viz;
  auto* viz_cmd = app.add_subcommand("viz", "render edge visualizations");
  viz_cmd->add_option("--mode", viz.mode, "hsv | overlay | per-class-gray");
  viz_cmd->add_option("--pred", viz.pred, "SEDP prediction file");
  viz_cmd->add_option("--seg", viz.seg, "seg map PGM (ground truth source)");
  viz_cmd->add_option("--k", viz.k, "classes in the seg map");
  viz_cmd->add_option("--out", viz.out, "output PPM path")->required();
  viz_cmd->add_flag("--top2", viz.top2,
                    "threshold at 0.5 and keep the two strongest classes");
  viz_cmd->add_option("--threshold", viz.threshold,
                      "overlay binarization threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen_cmd->parsed()) {
      sedge::cmd_gen_data(gen);
      std::printf("wrote dataset to %s\n", gen.out_dir.c_str());
    } else if (ml_cmd->parsed()) {
      int n = sedge::cmd_make_labels(ml_manifest, ml_radius);
      std::printf("wrote %d label stacks\n", n);
    } else if (train_cmd->parsed()) {
      sedge::RunConfig cfg =
          resolve_config(train_cmd, train_config_path, train_cfg);
      sedge::TrainResult res = sedge::cmd_train(cfg);
      std::printf("checkpoint %s (final loss %.4f)\n", res.checkpoint.c_str(),
                  res.final_total_loss);
    } else if (pr_cmd->parsed()) {
      sedge::cmd_predict(pr_checkpoint, pr_manifest, pr_out, threads);
      std::printf("predictions in %s\n", pr_out.c_str());
    } else if (ev_cmd->parsed()) {
      sedge::RunConfig cfg =
          resolve_config(ev_cmd, eval_config_path, eval_cfg);
      sedge::EvalArgs args;
      args.pred_dir = ev_pred;
      args.gt_manifest = ev_manifest;
      args.tolerance = cfg.tolerance;
      args.thresholds = cfg.thresholds;
      args.halve = cfg.halve;
      args.threads = threads;
      args.report_json = ev_json;
      args.report_txt = ev_txt;
      args.csv = ev_csv;
      args.config_echo = cfg;
      sedge::EvalReport rep = sedge::cmd_eval(args);
      std::fputs(sedge::report_to_text(rep).c_str(), stdout);
    } else if (viz_cmd->parsed()) {
      for (const std::string& f : sedge::cmd_viz(viz))
        std::printf("wrote %s\n", f.c_str());
    }
  } catch (const sedge::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const sedge::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const sedge::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
