#ifndef HRC_PIPELINE_HPP
#define HRC_PIPELINE_HPP

#include <string>

#include "options.hpp"
#include "training.hpp"

namespace hrc {

// High-level commands behind the public API. All throw on failure
// (IoError / ConfigError / DataError / EngineError).

void run_gen_data(const Options& opts, const std::string& out_dir,
                  int n_samples);

// Trains on dataset_dir (head split by val_fraction), writes
// checkpoint.hrc, report.json and curves.csv into out_dir.
TrainReport run_train(const Options& opts, const std::string& dataset_dir,
                      const std::string& out_dir);

// Returns the two-line CSV (header + row); writes eval.json next to it when
// eval_json_path is non-empty. The JSON carries exactly the CSV's values.
std::string run_eval(const Options& opts, const std::string& checkpoint,
                     const std::string& dataset_dir,
                     const std::string& eval_json_path);

void run_render_cam(const Options& opts, const std::string& checkpoint,
                    const std::string& image_png, const std::string& out_png);

void run_render_gam(const Options& opts, const std::string& dataset_dir,
                    const std::string& sample_id, const std::string& out_png);

}  // namespace hrc

#endif
