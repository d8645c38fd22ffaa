#ifndef HRC_DATA_HPP
#define HRC_DATA_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "heatmap.hpp"

namespace hrc {

// Synthetic dot-annotated counting scenes: soft-edged disks to count, a
// fraction of them at low contrast, plus ring/bar distractors with
// object-like intensity that carry no dots.
struct SyntheticConfig {
  int height = 64, width = 64;
  int count_min = 2, count_max = 12;
  double radius_min = 3.0, radius_max = 5.0;
  double intensity_min = 0.7, intensity_max = 1.0;
  double hard_fraction = 0.2;
  double hard_intensity_min = 0.25, hard_intensity_max = 0.4;
  int distractor_min = 0, distractor_max = 4;
  double background_level = 0.1;
  double min_separation = 6.0;
  uint64_t seed = 0;

  void validate() const;  // throws ConfigError
};

struct Sample {
  std::vector<double> image;  // h x w, values in [0, 1]
  int h = 0, w = 0;
  DotAnnotation annotation;
  std::string id;

  int count() const { return annotation.count(); }
};

// Pure function of (cfg.seed, index); regeneration is bit-identical.
Sample generate_sample(const SyntheticConfig& cfg, int index);

// Writes images/<id>.png, annotations.jsonl, manifest.json.
void generate_dataset(const SyntheticConfig& cfg, int n_samples,
                      const std::string& out_dir);

std::vector<Sample> load_dataset(const std::string& dir);

enum class SplitMode { kHead, kShuffled };

// Head split takes the first ceil(n * (1 - f)) samples for training.
std::pair<std::vector<Sample>, std::vector<Sample>> split(
    std::vector<Sample> samples, double val_fraction,
    SplitMode mode = SplitMode::kHead, uint64_t shuffle_seed = 0);

}  // namespace hrc

#endif
