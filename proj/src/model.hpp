#ifndef HRC_MODEL_HPP
#define HRC_MODEL_HPP

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "tensor.hpp"

namespace hrc {

// Scaled-down VGG-GAP counting network: four conv blocks with PReLU
// activations, 2x max-pool after the first `pooled_blocks` blocks, then
// global average pooling and a single linear unit producing the count.
struct ModelConfig {
  int in_channels = 1;
  std::array<int, 4> block_channels{16, 32, 64, 64};
  int convs_per_block = 2;
  int kernel_size = 3;
  int pooled_blocks = 3;  // max-pool after blocks 1..pooled_blocks
  double prelu_init = 0.25;
  uint64_t seed = 0;

  int cam_stride() const { return 1 << pooled_blocks; }
  void validate() const;  // throws ConfigError
};

struct ConvUnit {
  Tensor weight;  // O x I x k x k
  Tensor bias;    // O
  Tensor slope;   // O, PReLU negative-side slope per channel
};

struct CountNet {
  ModelConfig cfg;
  std::array<std::vector<ConvUnit>, 4> blocks;
  Tensor backend_weight;  // 1 x C
  Tensor backend_bias;    // 1

  std::vector<Tensor*> parameters();
  std::vector<std::pair<std::string, Tensor*>> named_parameters();
  std::vector<const Tensor*> parameters() const;
  void zero_grad();
};

struct ForwardOutput {
  Tensor count_pred;     // N x 1
  Tensor last_features;  // N x C x h x w, post-activation, pre-GAP
};

// He-scaled random weights from the seeded generator; biases zero, PReLU
// slopes at prelu_init. Identical (seed, config) gives identical bytes.
CountNet init_model(const ModelConfig& cfg);

ForwardOutput forward(Tape* tape, CountNet& net, const Tensor& images);

// CAM(n,y,x) = sum_c w[c] * F(n,c,y,x). The backend weight enters through
// detach so the CAM loss reaches only the convolutional parameters.
Tensor compute_cam(Tape* tape, const Tensor& last_features,
                   const Tensor& backend_weight);

void save_checkpoint(const CountNet& net, const std::string& path,
                     const std::string& label = "model");
CountNet load_checkpoint(const std::string& path, std::string* label = nullptr);

}  // namespace hrc

#endif
