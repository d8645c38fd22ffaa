#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>

#include <doctest.h>

#include "errors.hpp"
#include "model.hpp"

using namespace hrc;
namespace fs = std::filesystem;

namespace {

ModelConfig tiny_config(uint64_t seed = 1) {
  ModelConfig cfg;
  cfg.block_channels = {4, 6, 8, 8};
  cfg.seed = seed;
  return cfg;
}

Tensor random_images(int n, int hw, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> v(static_cast<size_t>(n) * hw * hw);
  for (double& x : v) x = u(rng);
  return Tensor::from({n, 1, hw, hw}, std::move(v));
}

fs::path tmp_path(const char* name) {
  fs::path p = fs::temp_directory_path() / "hrc_model_tests";
  fs::create_directories(p);
  return p / name;
}

}  // namespace

TEST_CASE("config validation") {
  ModelConfig ok = tiny_config();
  CHECK_NOTHROW(ok.validate());
  CHECK(ok.cam_stride() == 8);

  ModelConfig bad = tiny_config();
  bad.kernel_size = 4;  // even kernels break same-padding
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = tiny_config();
  bad.block_channels[2] = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = tiny_config();
  bad.pooled_blocks = 5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("init is deterministic in (seed, config)") {
  CountNet a = init_model(tiny_config(42));
  CountNet b = init_model(tiny_config(42));
  CountNet c = init_model(tiny_config(43));

  auto pa = a.parameters(), pb = b.parameters(), pc = c.parameters();
  REQUIRE(pa.size() == pb.size());
  bool any_diff = false;
  for (size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i]->values() == pb[i]->values());
    if (pa[i]->values() != pc[i]->values()) any_diff = true;
  }
  CHECK(any_diff);

  // biases zero, slopes at prelu_init
  for (const ConvUnit& u : a.blocks[0]) {
    for (double v : u.bias.values()) CHECK(v == 0.0);
    for (double v : u.slope.values()) CHECK(v == 0.25);
  }
}

TEST_CASE("parameter inventory") {
  CountNet net = init_model(tiny_config());
  auto named = net.named_parameters();
  // 4 blocks x 2 convs x 3 tensors + backend weight/bias
  CHECK(named.size() == 4 * 2 * 3 + 2);
  CHECK(named.front().first == "block0.conv0.weight");
  CHECK(named.back().first == "backend.bias");
  CHECK(net.backend_weight.shape == Shape{1, 8});
  CHECK(net.blocks[1][0].weight.shape == Shape{6, 4, 3, 3});
}

TEST_CASE("forward shapes and CAM-count identity") {
  CountNet net = init_model(tiny_config(7));
  Tensor imgs = random_images(2, 32, 9);
  ForwardOutput out = forward(nullptr, net, imgs);
  CHECK(out.count_pred.shape == Shape{2, 1});
  CHECK(out.last_features.shape == Shape{2, 8, 4, 4});

  // count = mean(CAM) + bias, because GAP and the channel-weighted sum
  // commute
  Tensor cam = compute_cam(nullptr, out.last_features, net.backend_weight);
  CHECK(cam.shape == Shape{2, 4, 4});
  for (int n = 0; n < 2; ++n) {
    double s = 0;
    for (int k = 0; k < 16; ++k) s += cam.values()[n * 16 + k];
    const double expect = s / 16 + net.backend_bias.values()[0];
    CHECK(out.count_pred.values()[n] ==
          doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("forward rejects extents not divisible by the stride") {
  CountNet net = init_model(tiny_config());
  Tensor bad = Tensor::zeros({1, 1, 30, 32});
  CHECK_THROWS_AS(forward(nullptr, net, bad), EngineError);
}

TEST_CASE("gradient routing: CAM loss never reaches the backend") {
  CountNet net = init_model(tiny_config(3));
  Tensor imgs = random_images(2, 16, 5);

  Tape tape;
  ForwardOutput out = forward(&tape, net, imgs);
  Tensor cam = compute_cam(&tape, out.last_features, net.backend_weight);
  Tensor target = Tensor::full(cam.shape, 0.5);
  tape.backward(ops::smooth_l1_loss(&tape, cam, target));

  for (double g : *net.backend_weight.grad) CHECK(g == 0.0);
  for (double g : *net.backend_bias.grad) CHECK(g == 0.0);
  // every block's conv weights receive gradient
  for (int b = 0; b < 4; ++b) {
    double mass = 0;
    for (const ConvUnit& u : net.blocks[b])
      for (double g : *u.weight.grad) mass += std::abs(g);
    CHECK(mass > 0.0);
  }

  // the count loss, by contrast, does reach the backend
  net.zero_grad();
  Tape t2;
  ForwardOutput out2 = forward(&t2, net, imgs);
  t2.backward(ops::l1_loss(&t2, out2.count_pred,
                           Tensor::from({2, 1}, {5.0, 7.0})));
  double backend_mass = 0;
  for (double g : *net.backend_weight.grad) backend_mass += std::abs(g);
  CHECK(backend_mass > 0.0);
}

TEST_CASE("checkpoint round trip") {
  CountNet net = init_model(tiny_config(21));
  const fs::path p1 = tmp_path("rt1.hrc"), p2 = tmp_path("rt2.hrc");
  save_checkpoint(net, p1.string(), "hr");

  std::string label;
  CountNet loaded = load_checkpoint(p1.string(), &label);
  CHECK(label == "hr");
  CHECK(loaded.cfg.block_channels == net.cfg.block_channels);

  // save -> load -> save is byte-identical
  save_checkpoint(loaded, p2.string(), label);
  auto slurp = [](const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), {});
  };
  CHECK(slurp(p1) == slurp(p2));

  // forward agreement within float32 quantization
  Tensor imgs = random_images(1, 16, 2);
  const double a = forward(nullptr, net, imgs).count_pred.values()[0];
  const double b = forward(nullptr, loaded, imgs).count_pred.values()[0];
  CHECK(std::abs(a - b) <= 1e-5);
}

TEST_CASE("checkpoint error handling") {
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/ckpt.hrc"), IoError);

  const fs::path bad = tmp_path("bad.hrc");
  {
    std::ofstream f(bad, std::ios::binary);
    f << "NOTAMAGIC........";
  }
  CHECK_THROWS_AS(load_checkpoint(bad.string()), IoError);

  // truncation detected
  CountNet net = init_model(tiny_config());
  const fs::path full = tmp_path("full.hrc"), trunc = tmp_path("trunc.hrc");
  save_checkpoint(net, full.string());
  {
    std::ifstream in(full, std::ios::binary);
    std::string bytes(std::istreambuf_iterator<char>(in), {});
    std::ofstream out(trunc, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 16));
  }
  CHECK_THROWS_AS(load_checkpoint(trunc.string()), IoError);
}
