#ifndef HRC_TRAINING_HPP
#define HRC_TRAINING_HPP

#include <string>
#include <vector>

#include "data.hpp"
#include "heatmap.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "tensor.hpp"

namespace hrc {

struct TrainConfig {
  double lr = 1e-4;
  double weight_decay = 1e-4;
  int lr_drop_epoch = 10;     // after this epoch the rate drops
  double lr_drop_factor = 0.1;
  int epochs = 100;
  int passes_per_epoch = 10;  // one epoch = this many passes over the data
  int batch_size = 4;
  double lambda_hr = 1.0;     // 0 disables the heatmap branch (baseline)
  GamConfig gam;              // downscale is taken from the model
  double norm_eps = 1e-8;
  double mass_radius = 6.0;   // for the CAM compactness diagnostic
  uint64_t seed = 0;

  void validate() const;
  double lr_at_epoch(int epoch) const;  // epoch is 1-based
};

struct EpochStats {
  int epoch = 0;
  double count_loss = 0, heatmap_loss = 0;
  double val_mae = 0, val_rmse = 0;
  double lr = 0;
};

struct TrainReport {
  std::string label;  // "baseline" when lambda_hr == 0, else "hr"
  std::vector<EpochStats> curves;
  int best_epoch = 0;  // 1-based; minimizes validation MAE, ties earliest
  EvalResult best_val;
  double wall_seconds = 0;
};

// L = L1(count_pred, target) + lambda * SmoothL1(norm(CAM), norm(GAM)).
// The CAM is built from detached backend weights, so the heatmap term
// reaches only convolutional parameters. `norm_gams` is the N x h x w stack
// of already-normalized ground-truth maps; may be null when lambda is 0.
Tensor hr_loss(Tape* tape, const ForwardOutput& out,
               const Tensor& target_counts, const Tensor* norm_gams,
               const Tensor& backend_weight, double lambda_hr,
               double norm_eps);

struct EvalOutcome {
  EvalResult metrics;
  double mean_cam_mass_ratio = 0;
};

EvalOutcome evaluate_model(CountNet& net, const std::vector<Sample>& samples,
                           double mass_radius = 6.0);

std::pair<CountNet, TrainReport> train(CountNet net,
                                       const std::vector<Sample>& train_samples,
                                       const std::vector<Sample>& val_samples,
                                       const TrainConfig& cfg);

// report.json + curves.csv; byte-stable across identical runs (wall time is
// reported on stdout only, never in the artifacts).
void write_report(const TrainReport& report, const std::string& out_dir);

}  // namespace hrc

#endif
