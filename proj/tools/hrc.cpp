// Command-line front door for the counting library. Talks to the core
// exclusively through the public C API.
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hrcount.h"

namespace {

struct OptionsDeleter {
  void operator()(hrc_options* o) const { hrc_options_destroy(o); }
};
using OptionsPtr = std::unique_ptr<hrc_options, OptionsDeleter>;

int die(hrc_status st) {
  std::fprintf(stderr, "error: %s\n", hrc_last_error());
  return st == HRC_OK ? 0 : 1;
}

// flag > config file > default
int apply_options(hrc_options* opts, const std::string& config_file,
                  const std::vector<std::string>& sets,
                  const std::vector<std::pair<std::string, std::string>>&
                      flag_overrides) {
  if (!config_file.empty()) {
    if (hrc_options_load_file(opts, config_file.c_str()) != HRC_OK) {
      std::fprintf(stderr, "error: %s\n", hrc_last_error());
      return 1;
    }
  }
  for (const std::string& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n",
                   kv.c_str());
      return 1;
    }
    auto strip = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? "" : s.substr(a, b - a + 1);
    };
    if (hrc_options_set(opts, strip(kv.substr(0, eq)).c_str(),
                        strip(kv.substr(eq + 1)).c_str()) != HRC_OK) {
      std::fprintf(stderr, "error: %s\n", hrc_last_error());
      return 1;
    }
  }
  for (const auto& [key, value] : flag_overrides)
    if (hrc_options_set(opts, key.c_str(), value.c_str()) != HRC_OK) {
      std::fprintf(stderr, "error: %s\n", hrc_last_error());
      return 1;
    }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hrc — heatmap-regulated one-look object counting"};
  app.require_subcommand(1);

  std::string config_file;
  std::vector<std::string> sets;
  app.add_option("--config", config_file, "key = value config file")
      ->capture_default_str();
  app.add_option("--set", sets, "override one config key (key=value)");

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
  std::string gen_out;
  int gen_n = 0;
  std::string gen_seed;
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--n", gen_n, "number of samples")->required();
  gen->add_option("--seed", gen_seed, "dataset seed");

  // train
  auto* tr = app.add_subcommand("train", "train a counting model");
  std::string tr_data, tr_out;
  std::string tr_epochs, tr_lambda, tr_lr, tr_valf, tr_seed, tr_sigma;
  tr->add_option("--data", tr_data, "dataset directory")->required();
  tr->add_option("--out", tr_out, "output directory")->required();
  tr->add_option("--epochs", tr_epochs, "number of epochs");
  tr->add_option("--lambda-hr", tr_lambda, "heatmap loss weight (0 = baseline)");
  tr->add_option("--lr", tr_lr, "initial learning rate");
  tr->add_option("--val-fraction", tr_valf, "validation holdout fraction");
  tr->add_option("--seed", tr_seed, "training seed");
  tr->add_option("--sigma", tr_sigma, "ground-truth map sigma (pixels)");

  // eval
  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  std::string ev_ckpt, ev_data, ev_json = "eval.json";
  ev->add_option("--checkpoint", ev_ckpt, "checkpoint file")->required();
  ev->add_option("--data", ev_data, "dataset directory")->required();
  ev->add_option("--json", ev_json, "where to write eval.json")
      ->capture_default_str();

  // render
  auto* rd = app.add_subcommand("render", "superimposed heatmap overlay PNG");
  std::string rd_ckpt, rd_image, rd_out, rd_data, rd_id, rd_sigma;
  bool rd_gam = false;
  rd->add_option("--checkpoint", rd_ckpt, "checkpoint file (CAM mode)");
  rd->add_option("--image", rd_image, "input grayscale PNG (CAM mode)");
  rd->add_option("--out", rd_out, "output PNG")->required();
  rd->add_flag("--gam", rd_gam, "render the ground-truth map instead");
  rd->add_option("--data", rd_data, "dataset directory (GAM mode)");
  rd->add_option("--id", rd_id, "sample id (GAM mode)");
  rd->add_option("--sigma", rd_sigma, "ground-truth map sigma (pixels)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    std::fprintf(stderr, "%s", app.help().c_str());
    return 2;
  }

  OptionsPtr opts(hrc_options_create());
  std::vector<std::pair<std::string, std::string>> overrides;

  if (gen->parsed()) {
    if (!gen_seed.empty()) overrides.emplace_back("data_seed", gen_seed);
    if (apply_options(opts.get(), config_file, sets, overrides)) return 1;
    hrc_status st = hrc_generate_dataset(opts.get(), gen_out.c_str(), gen_n);
    if (st != HRC_OK) return die(st);
    std::printf("wrote %d samples to %s\n", gen_n, gen_out.c_str());
    return 0;
  }

  if (tr->parsed()) {
    if (!tr_epochs.empty()) overrides.emplace_back("epochs", tr_epochs);
    if (!tr_lambda.empty()) overrides.emplace_back("lambda_hr", tr_lambda);
    if (!tr_lr.empty()) overrides.emplace_back("lr", tr_lr);
    if (!tr_valf.empty()) overrides.emplace_back("val_fraction", tr_valf);
    if (!tr_seed.empty()) overrides.emplace_back("train_seed", tr_seed);
    if (!tr_sigma.empty()) overrides.emplace_back("sigma", tr_sigma);
    if (apply_options(opts.get(), config_file, sets, overrides)) return 1;
    char summary[256] = {0};
    hrc_status st = hrc_train(opts.get(), tr_data.c_str(), tr_out.c_str(),
                              summary, sizeof(summary));
    if (st != HRC_OK) return die(st);
    std::printf("%s\n", summary);
    return 0;
  }

  if (ev->parsed()) {
    if (apply_options(opts.get(), config_file, sets, overrides)) return 1;
    std::vector<char> csv(4096);
    hrc_status st = hrc_evaluate(opts.get(), ev_ckpt.c_str(), ev_data.c_str(),
                                 ev_json.c_str(), csv.data(), csv.size());
    if (st != HRC_OK) return die(st);
    std::printf("%s", csv.data());
    return 0;
  }

  if (rd->parsed()) {
    if (!rd_sigma.empty()) overrides.emplace_back("sigma", rd_sigma);
    if (apply_options(opts.get(), config_file, sets, overrides)) return 1;
    hrc_status st;
    if (rd_gam) {
      if (rd_data.empty() || rd_id.empty()) {
        std::fprintf(stderr, "render --gam requires --data and --id\n");
        return 2;
      }
      st = hrc_render_gam(opts.get(), rd_data.c_str(), rd_id.c_str(),
                          rd_out.c_str());
    } else {
      if (rd_ckpt.empty() || rd_image.empty()) {
        std::fprintf(stderr, "render requires --checkpoint and --image\n");
        return 2;
      }
      st = hrc_render_cam(opts.get(), rd_ckpt.c_str(), rd_image.c_str(),
                          rd_out.c_str());
    }
    if (st != HRC_OK) return die(st);
    std::printf("wrote %s\n", rd_out.c_str());
    return 0;
  }

  return 2;
}
