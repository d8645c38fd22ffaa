#include "training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "errors.hpp"

namespace hrc {

namespace fs = std::filesystem;
using nlohmann::json;

void TrainConfig::validate() const {
  if (lr <= 0 || lr_drop_factor <= 0) throw ConfigError("rates must be > 0");
  if (weight_decay < 0) throw ConfigError("weight_decay must be >= 0");
  if (epochs < 1 || passes_per_epoch < 1 || batch_size < 1)
    throw ConfigError("epochs, passes_per_epoch and batch_size must be >= 1");
  if (lr_drop_epoch < 0) throw ConfigError("lr_drop_epoch must be >= 0");
  if (lambda_hr < 0) throw ConfigError("lambda_hr must be >= 0");
  if (norm_eps < 0) throw ConfigError("norm_eps must be >= 0");
}

double TrainConfig::lr_at_epoch(int epoch) const {
  return epoch <= lr_drop_epoch ? lr : lr * lr_drop_factor;
}

Tensor hr_loss(Tape* tape, const ForwardOutput& out,
               const Tensor& target_counts, const Tensor* norm_gams,
               const Tensor& backend_weight, double lambda_hr,
               double norm_eps) {
  Tensor count_term = ops::l1_loss(tape, out.count_pred, target_counts);
  if (lambda_hr == 0) return count_term;
  if (!norm_gams)
    throw EngineError("hr_loss: heatmap target required when lambda_hr > 0");
  Tensor cam = compute_cam(tape, out.last_features, backend_weight);
  if (cam.shape != norm_gams->shape)
    throw EngineError("hr_loss: GAM resolution " + shape_str(norm_gams->shape) +
                      " does not match CAM " + shape_str(cam.shape));
  Tensor norm_cam = ops::normalize_per_sample(tape, cam, norm_eps);
  Tensor heat_term = ops::smooth_l1_loss(tape, norm_cam, *norm_gams);
  return ops::add(tape, count_term, ops::scale(tape, heat_term, lambda_hr));
}

namespace {

Tensor stack_images(const std::vector<Sample>& samples,
                    const std::vector<size_t>& idx, size_t first,
                    size_t count) {
  const Sample& ref = samples[idx[first]];
  Tensor batch = Tensor::zeros({static_cast<int>(count), 1, ref.h, ref.w});
  for (size_t b = 0; b < count; ++b) {
    const Sample& s = samples[idx[first + b]];
    if (s.h != ref.h || s.w != ref.w)
      throw DataError("mixed image extents in one batch");
    std::copy(s.image.begin(), s.image.end(),
              batch.values().begin() + b * s.image.size());
  }
  return batch;
}

ActivationMap map_from_plane(const Tensor& stack, int n, int stride,
                             int image_h, int image_w) {
  ActivationMap m;
  m.h = stack.shape[1];
  m.w = stack.shape[2];
  m.stride = stride;
  m.image_h = image_h;
  m.image_w = image_w;
  const size_t plane = static_cast<size_t>(m.h) * m.w;
  m.v.assign(stack.values().begin() + n * plane,
             stack.values().begin() + (n + 1) * plane);
  return m;
}

}  // namespace

EvalOutcome evaluate_model(CountNet& net, const std::vector<Sample>& samples,
                           double mass_radius) {
  if (samples.empty()) throw DataError("evaluate_model: no samples");
  std::vector<CountPair> pairs;
  double mass_sum = 0;
  const int stride = net.cfg.cam_stride();
  const size_t chunk = 16;
  std::vector<size_t> idx(samples.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (size_t start = 0; start < samples.size(); start += chunk) {
    const size_t count = std::min(chunk, samples.size() - start);
    Tensor batch = stack_images(samples, idx, start, count);
    ForwardOutput out = forward(nullptr, net, batch);
    Tensor cam = compute_cam(nullptr, out.last_features, net.backend_weight);
    for (size_t b = 0; b < count; ++b) {
      const Sample& s = samples[start + b];
      pairs.push_back({out.count_pred.values()[b],
                       static_cast<double>(s.count())});
      ActivationMap m = map_from_plane(cam, static_cast<int>(b), stride, s.h,
                                       s.w);
      mass_sum += cam_mass_ratio(m, s.annotation, mass_radius);
    }
  }
  EvalOutcome o;
  o.metrics = evaluate(pairs);
  o.mean_cam_mass_ratio = mass_sum / samples.size();
  return o;
}

std::pair<CountNet, TrainReport> train(CountNet net,
                                       const std::vector<Sample>& train_samples,
                                       const std::vector<Sample>& val_samples,
                                       const TrainConfig& cfg) {
  cfg.validate();
  if (train_samples.empty() || val_samples.empty())
    throw DataError("train: empty split");
  const auto t_start = std::chrono::steady_clock::now();

  const int stride = net.cfg.cam_stride();
  const int gh = train_samples[0].h / stride, gw = train_samples[0].w / stride;

  // GAMs are rendered and normalized once per sample.
  GamConfig gam_cfg = cfg.gam;
  gam_cfg.downscale = stride;
  std::vector<std::vector<double>> norm_gams;
  if (cfg.lambda_hr > 0) {
    norm_gams.reserve(train_samples.size());
    for (const Sample& s : train_samples) {
      ActivationMap m =
          normalize_map(render_gam(s.annotation, s.h, s.w, gam_cfg),
                        cfg.norm_eps);
      norm_gams.push_back(std::move(m.v));
    }
  }

  auto params = net.parameters();
  AdamConfig adam_cfg;
  adam_cfg.lr = cfg.lr;
  adam_cfg.weight_decay = cfg.weight_decay;
  AdamState adam = AdamState::init(params, adam_cfg);

  std::mt19937_64 shuffle_rng(cfg.seed);
  std::vector<size_t> idx(train_samples.size());
  std::iota(idx.begin(), idx.end(), 0);

  TrainReport report;
  report.label = cfg.lambda_hr == 0 ? "baseline" : "hr";
  double best_mae = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> best_params;
  EvalResult best_val;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    adam.cfg.lr = cfg.lr_at_epoch(epoch);
    double count_loss_sum = 0, heat_loss_sum = 0;
    int n_batches = 0;
    for (int pass = 0; pass < cfg.passes_per_epoch; ++pass) {
      std::shuffle(idx.begin(), idx.end(), shuffle_rng);
      for (size_t start = 0; start < idx.size();
           start += cfg.batch_size, ++n_batches) {
        const size_t count =
            std::min<size_t>(cfg.batch_size, idx.size() - start);
        Tensor batch = stack_images(train_samples, idx, start, count);
        Tensor targets = Tensor::zeros({static_cast<int>(count), 1});
        Tensor gams;
        if (cfg.lambda_hr > 0)
          gams = Tensor::zeros({static_cast<int>(count), gh, gw});
        for (size_t b = 0; b < count; ++b) {
          const size_t si = idx[start + b];
          targets.values()[b] = train_samples[si].count();
          if (cfg.lambda_hr > 0)
            std::copy(norm_gams[si].begin(), norm_gams[si].end(),
                      gams.values().begin() + b * norm_gams[si].size());
        }
        try {
          Tape tape;
          ForwardOutput out = forward(&tape, net, batch);
          Tensor count_term = ops::l1_loss(&tape, out.count_pred, targets);
          Tensor loss = count_term;
          if (cfg.lambda_hr > 0) {
            Tensor cam = compute_cam(&tape, out.last_features,
                                     net.backend_weight);
            Tensor heat_term = ops::smooth_l1_loss(
                &tape, ops::normalize_per_sample(&tape, cam, cfg.norm_eps),
                gams);
            heat_loss_sum += heat_term.values()[0];
            loss = ops::add(&tape, count_term,
                            ops::scale(&tape, heat_term, cfg.lambda_hr));
          }
          count_loss_sum += count_term.values()[0];
          net.zero_grad();
          tape.backward(loss);
        } catch (const EngineError& e) {
          throw DataError("training diverged at epoch " +
                          std::to_string(epoch) + ", batch " +
                          std::to_string(n_batches) + ": " + e.what());
        }
        adam_step(params, adam);
      }
    }

    EvalOutcome val = evaluate_model(net, val_samples, cfg.mass_radius);
    EpochStats st;
    st.epoch = epoch;
    st.count_loss = count_loss_sum / n_batches;
    st.heatmap_loss = cfg.lambda_hr > 0 ? heat_loss_sum / n_batches : 0;
    st.val_mae = val.metrics.mae;
    st.val_rmse = val.metrics.rmse;
    st.lr = adam.cfg.lr;
    report.curves.push_back(st);

    if (val.metrics.mae < best_mae) {
      best_mae = val.metrics.mae;
      best_val = val.metrics;
      report.best_epoch = epoch;
      best_params.clear();
      for (const Tensor* p : std::as_const(net).parameters())
        best_params.push_back(p->values());
    }
  }

  for (size_t i = 0; i < params.size(); ++i)
    params[i]->values() = best_params[i];
  report.best_val = best_val;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return {std::move(net), std::move(report)};
}

void write_report(const TrainReport& report, const std::string& out_dir) {
  json j{{"label", report.label},
         {"best_epoch", report.best_epoch},
         {"epochs", report.curves.size()},
         {"validation",
          {{"mae", report.best_val.mae},
           {"rmse", report.best_val.rmse},
           {"pct_over", report.best_val.pct_over},
           {"pct_under", report.best_val.pct_under},
           {"pct_diff", report.best_val.pct_diff},
           {"n", report.best_val.n}}}};
  std::ofstream rf(fs::path(out_dir) / "report.json", std::ios::trunc);
  if (!rf) throw IoError("cannot write report.json in " + out_dir);
  rf << j.dump(2) << "\n";

  std::ofstream cf(fs::path(out_dir) / "curves.csv", std::ios::trunc);
  if (!cf) throw IoError("cannot write curves.csv in " + out_dir);
  cf << "epoch,count_loss,heatmap_loss,val_mae,val_rmse,lr\n";
  char buf[256];
  for (const EpochStats& s : report.curves) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g,%.9g,%.9g\n", s.epoch,
                  s.count_loss, s.heatmap_loss, s.val_mae, s.val_rmse, s.lr);
    cf << buf;
  }
}

}  // namespace hrc
