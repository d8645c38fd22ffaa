#include "hrcount.h"

#include <cstring>
#include <string>

#include "errors.hpp"
#include "model.hpp"
#include "options.hpp"
#include "pipeline.hpp"
#include "tensor.hpp"

namespace {

thread_local std::string g_last_error;

void copy_out(char* dst, size_t cap, const std::string& src) {
  if (!dst || cap == 0) return;
  const size_t n = std::min(cap - 1, src.size());
  std::memcpy(dst, src.data(), n);
  dst[n] = '\0';
}

hrc_status fail(hrc_status code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

template <typename Fn>
hrc_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return HRC_OK;
  } catch (const hrc::ConfigError& e) {
    return fail(HRC_ERR_CONFIG, e.what());
  } catch (const hrc::IoError& e) {
    return fail(HRC_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(HRC_ERR_RUNTIME, e.what());
  }
}

}  // namespace

struct hrc_options {
  hrc::Options opts;
};

struct hrc_model {
  hrc::CountNet net;
};

extern "C" {

const char* hrc_last_error(void) { return g_last_error.c_str(); }

hrc_options* hrc_options_create(void) { return new hrc_options(); }

void hrc_options_destroy(hrc_options* opts) { delete opts; }

hrc_status hrc_options_load_file(hrc_options* opts, const char* path) {
  if (!opts || !path) return fail(HRC_ERR_ARG, "null argument");
  return guarded([&] { opts->opts.load_file(path); });
}

hrc_status hrc_options_set(hrc_options* opts, const char* key,
                           const char* value) {
  if (!opts || !key || !value) return fail(HRC_ERR_ARG, "null argument");
  return guarded([&] { opts->opts.set(key, value); });
}

hrc_status hrc_generate_dataset(const hrc_options* opts, const char* out_dir,
                                int n_samples) {
  if (!opts || !out_dir) return fail(HRC_ERR_ARG, "null argument");
  return guarded([&] { hrc::run_gen_data(opts->opts, out_dir, n_samples); });
}

hrc_status hrc_train(const hrc_options* opts, const char* dataset_dir,
                     const char* out_dir, char* summary, size_t summary_cap) {
  if (!opts || !dataset_dir || !out_dir)
    return fail(HRC_ERR_ARG, "null argument");
  return guarded([&] {
    hrc::TrainReport r = hrc::run_train(opts->opts, dataset_dir, out_dir);
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "%s: best epoch %d, val MAE %.4f, RMSE %.4f, %.1f s",
                  r.label.c_str(), r.best_epoch, r.best_val.mae,
                  r.best_val.rmse, r.wall_seconds);
    copy_out(summary, summary_cap, buf);
  });
}

hrc_status hrc_evaluate(const hrc_options* opts, const char* checkpoint,
                        const char* dataset_dir, const char* eval_json_path,
                        char* csv_out, size_t csv_cap) {
  if (!opts || !checkpoint || !dataset_dir)
    return fail(HRC_ERR_ARG, "null argument");
  return guarded([&] {
    std::string csv =
        hrc::run_eval(opts->opts, checkpoint, dataset_dir,
                      eval_json_path ? eval_json_path : "");
    copy_out(csv_out, csv_cap, csv);
  });
}

hrc_status hrc_render_cam(const hrc_options* opts, const char* checkpoint,
                          const char* image_png, const char* out_png) {
  if (!opts || !checkpoint || !image_png || !out_png)
    return fail(HRC_ERR_ARG, "null argument");
  return guarded([&] {
    hrc::run_render_cam(opts->opts, checkpoint, image_png, out_png);
  });
}

hrc_status hrc_render_gam(const hrc_options* opts, const char* dataset_dir,
                          const char* sample_id, const char* out_png) {
  if (!opts || !dataset_dir || !sample_id || !out_png)
    return fail(HRC_ERR_ARG, "null argument");
  return guarded([&] {
    hrc::run_render_gam(opts->opts, dataset_dir, sample_id, out_png);
  });
}

hrc_model* hrc_model_load(const char* checkpoint) {
  if (!checkpoint) {
    fail(HRC_ERR_ARG, "null argument");
    return nullptr;
  }
  try {
    auto* m = new hrc_model{hrc::load_checkpoint(checkpoint)};
    g_last_error.clear();
    return m;
  } catch (const std::exception& e) {
    fail(HRC_ERR_IO, e.what());
    return nullptr;
  }
}

void hrc_model_destroy(hrc_model* model) { delete model; }

hrc_status hrc_model_count(hrc_model* model, const double* image, int h,
                           int w, double* count_out) {
  if (!model || !image || !count_out)
    return fail(HRC_ERR_ARG, "null argument");
  return guarded([&] {
    hrc::Tensor input = hrc::Tensor::zeros({1, 1, h, w});
    std::copy(image, image + static_cast<size_t>(h) * w,
              input.values().begin());
    hrc::ForwardOutput out = hrc::forward(nullptr, model->net, input);
    *count_out = out.count_pred.values()[0];
  });
}

}  // extern "C"
