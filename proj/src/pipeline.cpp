#include "pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "png_io.hpp"
#include "render.hpp"

namespace hrc {

namespace fs = std::filesystem;
using nlohmann::json;

void run_gen_data(const Options& opts, const std::string& out_dir,
                  int n_samples) {
  if (n_samples < 1) throw ConfigError("n_samples must be >= 1");
  generate_dataset(opts.synthetic(), n_samples, out_dir);
}

TrainReport run_train(const Options& opts, const std::string& dataset_dir,
                      const std::string& out_dir) {
  std::vector<Sample> samples = load_dataset(dataset_dir);
  auto [train_samples, val_samples] =
      split(std::move(samples), opts.get_double("val_fraction"));
  CountNet net = init_model(opts.model());
  TrainConfig cfg = opts.trainer();
  auto [best, report] = train(std::move(net), train_samples, val_samples, cfg);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + out_dir);
  save_checkpoint(best, (fs::path(out_dir) / "checkpoint.hrc").string(),
                  report.label);
  write_report(report, out_dir);
  return report;
}

std::string run_eval(const Options& opts, const std::string& checkpoint,
                     const std::string& dataset_dir,
                     const std::string& eval_json_path) {
  std::string label;
  CountNet net = load_checkpoint(checkpoint, &label);
  std::vector<Sample> samples = load_dataset(dataset_dir);
  EvalOutcome o =
      evaluate_model(net, samples, opts.get_double("mass_radius"));

  char row[512];
  std::snprintf(row, sizeof(row), "%s,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f\n",
                label.c_str(), o.metrics.mae, o.metrics.rmse,
                o.metrics.pct_over, o.metrics.pct_under, o.metrics.pct_diff,
                o.mean_cam_mass_ratio);
  std::string csv = "method,MAE,RMSE,%O,%U,%D,cam_mass_ratio\n";
  csv += row;

  if (!eval_json_path.empty()) {
    // the JSON carries the CSV's printed values, not the raw doubles, so
    // the two artifacts agree exactly
    double mae, rmse, po, pu, pd, mass;
    char lbl[128];
    if (std::sscanf(row, "%127[^,],%lf,%lf,%lf,%lf,%lf,%lf", lbl, &mae, &rmse,
                    &po, &pu, &pd, &mass) != 7)
      throw IoError("internal: failed to parse eval row");
    json j{{"method", label}, {"mae", mae},      {"rmse", rmse},
           {"pct_over", po},  {"pct_under", pu}, {"pct_diff", pd},
           {"cam_mass_ratio", mass}, {"n", o.metrics.n}};
    std::ofstream out(eval_json_path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + eval_json_path);
    out << j.dump(2) << "\n";
  }
  return csv;
}

namespace {

GrayImage to_gray(const std::vector<double>& image, int h, int w) {
  GrayImage g;
  g.h = h;
  g.w = w;
  g.px.resize(image.size());
  for (size_t i = 0; i < image.size(); ++i)
    g.px[i] = static_cast<uint8_t>(std::lround(image[i] * 255.0));
  return g;
}

}  // namespace

void run_render_cam(const Options& opts, const std::string& checkpoint,
                    const std::string& image_png, const std::string& out_png) {
  (void)opts;
  CountNet net = load_checkpoint(checkpoint);
  GrayImage img = read_gray_png(image_png);
  Tensor input = Tensor::zeros({1, 1, img.h, img.w});
  for (size_t i = 0; i < img.px.size(); ++i)
    input.values()[i] = img.px[i] / 255.0;
  ForwardOutput out = forward(nullptr, net, input);
  Tensor cam = compute_cam(nullptr, out.last_features, net.backend_weight);
  ActivationMap m;
  m.h = cam.shape[1];
  m.w = cam.shape[2];
  m.stride = net.cfg.cam_stride();
  m.image_h = img.h;
  m.image_w = img.w;
  m.v = cam.values();
  write_rgb_png(out_png, overlay_heatmap(img, normalize_map(m, 1e-8)));
}

void run_render_gam(const Options& opts, const std::string& dataset_dir,
                    const std::string& sample_id, const std::string& out_png) {
  std::vector<Sample> samples = load_dataset(dataset_dir);
  const Sample* found = nullptr;
  for (const Sample& s : samples)
    if (s.id == sample_id) {
      found = &s;
      break;
    }
  if (!found)
    throw DataError("sample id '" + sample_id + "' not in " + dataset_dir);
  GamConfig gam;
  gam.sigma = opts.get_double("sigma");
  gam.kernel_radius = opts.get_int("kernel_radius");
  gam.downscale = opts.model().cam_stride();
  ActivationMap m = render_gam(found->annotation, found->h, found->w, gam);
  write_rgb_png(out_png, overlay_heatmap(to_gray(found->image, found->h,
                                                 found->w),
                                         normalize_map(m, 1e-8)));
}

}  // namespace hrc
