#include "model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "errors.hpp"

namespace hrc {

using nlohmann::json;

void ModelConfig::validate() const {
  if (in_channels < 1) throw ConfigError("in_channels must be >= 1");
  for (int c : block_channels)
    if (c < 1) throw ConfigError("block channel widths must be >= 1");
  if (convs_per_block < 1) throw ConfigError("convs_per_block must be >= 1");
  if (kernel_size < 1 || kernel_size % 2 == 0)
    throw ConfigError("kernel_size must be odd and >= 1");
  if (pooled_blocks < 0 || pooled_blocks > 4)
    throw ConfigError("pooled_blocks must be in [0, 4]");
}

std::vector<Tensor*> CountNet::parameters() {
  std::vector<Tensor*> out;
  for (auto& [name, p] : named_parameters()) out.push_back(p);
  return out;
}

std::vector<const Tensor*> CountNet::parameters() const {
  std::vector<const Tensor*> out;
  auto& self = const_cast<CountNet&>(*this);
  for (auto& [name, p] : self.named_parameters()) out.push_back(p);
  return out;
}

std::vector<std::pair<std::string, Tensor*>> CountNet::named_parameters() {
  std::vector<std::pair<std::string, Tensor*>> out;
  for (int b = 0; b < 4; ++b)
    for (size_t c = 0; c < blocks[b].size(); ++c) {
      std::string base =
          "block" + std::to_string(b) + ".conv" + std::to_string(c) + ".";
      out.emplace_back(base + "weight", &blocks[b][c].weight);
      out.emplace_back(base + "bias", &blocks[b][c].bias);
      out.emplace_back(base + "slope", &blocks[b][c].slope);
    }
  out.emplace_back("backend.weight", &backend_weight);
  out.emplace_back("backend.bias", &backend_bias);
  return out;
}

void CountNet::zero_grad() {
  for (Tensor* p : parameters()) p->zero_grad();
}

namespace {

// Structure with zero-valued parameters; filled by init or checkpoint load.
CountNet make_structure(const ModelConfig& cfg) {
  cfg.validate();
  CountNet net;
  net.cfg = cfg;
  int in_ch = cfg.in_channels;
  for (int b = 0; b < 4; ++b) {
    const int out_ch = cfg.block_channels[b];
    for (int c = 0; c < cfg.convs_per_block; ++c) {
      ConvUnit u;
      const int k = cfg.kernel_size;
      u.weight = Tensor::param({out_ch, in_ch, k, k},
                               std::vector<double>(
                                   static_cast<size_t>(out_ch) * in_ch * k * k,
                                   0.0));
      u.bias = Tensor::param({out_ch}, std::vector<double>(out_ch, 0.0));
      u.slope = Tensor::param({out_ch}, std::vector<double>(out_ch, 0.0));
      net.blocks[b].push_back(std::move(u));
      in_ch = out_ch;
    }
  }
  const int C = cfg.block_channels[3];
  net.backend_weight = Tensor::param({1, C}, std::vector<double>(C, 0.0));
  net.backend_bias = Tensor::param({1}, {0.0});
  return net;
}

}  // namespace

CountNet init_model(const ModelConfig& cfg) {
  CountNet net = make_structure(cfg);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int b = 0; b < 4; ++b)
    for (ConvUnit& u : net.blocks[b]) {
      const int fan_in = u.weight.shape[1] * u.weight.shape[2] * u.weight.shape[3];
      const double sd = std::sqrt(2.0 / fan_in);
      for (double& w : u.weight.values()) w = sd * normal(rng);
      std::fill(u.slope.values().begin(), u.slope.values().end(),
                cfg.prelu_init);
    }
  const double sd = std::sqrt(2.0 / net.backend_weight.size());
  for (double& w : net.backend_weight.values()) w = sd * normal(rng);
  return net;
}

ForwardOutput forward(Tape* tape, CountNet& net, const Tensor& images) {
  if (images.shape.size() != 4)
    throw EngineError("forward: images must be N x C x H x W");
  if (images.shape[1] != net.cfg.in_channels)
    throw EngineError("forward: channel count mismatch");
  const int stride = net.cfg.cam_stride();
  if (images.shape[2] % stride != 0 || images.shape[3] % stride != 0)
    throw EngineError("forward: image extents not divisible by CAM stride " +
                      std::to_string(stride));
  const int pad = net.cfg.kernel_size / 2;
  Tensor x = images;
  for (int b = 0; b < 4; ++b) {
    for (ConvUnit& u : net.blocks[b]) {
      x = ops::conv2d(tape, x, u.weight, u.bias, 1, pad);
      x = ops::prelu(tape, x, u.slope);
    }
    if (b < net.cfg.pooled_blocks) x = ops::maxpool2x2(tape, x);
  }
  ForwardOutput out;
  out.last_features = x;
  Tensor pooled = ops::global_avg_pool(tape, x);
  out.count_pred = ops::affine(tape, pooled, net.backend_weight,
                               net.backend_bias);
  return out;
}

Tensor compute_cam(Tape* tape, const Tensor& last_features,
                   const Tensor& backend_weight) {
  return ops::channel_weighted_sum(tape, last_features,
                                   backend_weight.values());
}

namespace {

constexpr char kMagic[] = "HRC1\n";
constexpr size_t kMagicLen = 5;

json config_to_json(const ModelConfig& c) {
  return json{{"in_channels", c.in_channels},
              {"block_channels", c.block_channels},
              {"convs_per_block", c.convs_per_block},
              {"kernel_size", c.kernel_size},
              {"pooled_blocks", c.pooled_blocks},
              {"prelu_init", c.prelu_init},
              {"seed", c.seed}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.in_channels = j.at("in_channels").get<int>();
  auto bc = j.at("block_channels").get<std::vector<int>>();
  if (bc.size() != 4) throw IoError("checkpoint: block_channels must have 4 entries");
  std::copy(bc.begin(), bc.end(), c.block_channels.begin());
  c.convs_per_block = j.at("convs_per_block").get<int>();
  c.kernel_size = j.at("kernel_size").get<int>();
  c.pooled_blocks = j.at("pooled_blocks").get<int>();
  c.prelu_init = j.at("prelu_init").get<double>();
  c.seed = j.at("seed").get<uint64_t>();
  return c;
}

void put_u32le(std::string& s, uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

}  // namespace

void save_checkpoint(const CountNet& net, const std::string& path,
                     const std::string& label) {
  auto& self = const_cast<CountNet&>(net);
  auto named = self.named_parameters();

  json dir = json::array();
  uint64_t offset = 0;
  for (auto& [name, p] : named) {
    dir.push_back(
        {{"name", name}, {"shape", p->shape}, {"offset", offset}});
    offset += static_cast<uint64_t>(p->size()) * 4;
  }
  json header{{"format_version", 1},
              {"label", label},
              {"config", config_to_json(net.cfg)},
              {"params", dir}};
  const std::string htext = header.dump();

  std::string blob;
  blob.reserve(kMagicLen + 4 + htext.size() + offset);
  blob.append(kMagic, kMagicLen);
  put_u32le(blob, static_cast<uint32_t>(htext.size()));
  blob += htext;
  for (auto& [name, p] : named)
    for (double v : p->values()) {
      const float f = static_cast<float>(v);
      uint32_t bits;
      std::memcpy(&bits, &f, 4);
      put_u32le(blob, bits);
    }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path);
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw IoError("write failed: " + path);
}

CountNet load_checkpoint(const std::string& path, std::string* label) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  std::string blob((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (blob.size() < kMagicLen + 4 ||
      std::memcmp(blob.data(), kMagic, kMagicLen) != 0)
    throw IoError("not a checkpoint file (bad magic): " + path);
  uint32_t hlen = 0;
  for (int i = 0; i < 4; ++i)
    hlen |= static_cast<uint32_t>(
                static_cast<unsigned char>(blob[kMagicLen + i]))
            << (8 * i);
  if (blob.size() < kMagicLen + 4 + hlen)
    throw IoError("truncated checkpoint header: " + path);
  json header;
  try {
    header = json::parse(blob.substr(kMagicLen + 4, hlen));
  } catch (const json::exception& e) {
    throw IoError("malformed checkpoint header: " + std::string(e.what()));
  }
  if (header.at("format_version").get<int>() != 1)
    throw IoError("unsupported checkpoint version");
  if (label) *label = header.value("label", "model");

  CountNet net = make_structure(config_from_json(header.at("config")));
  auto named = net.named_parameters();
  const json& dir = header.at("params");
  if (dir.size() != named.size())
    throw IoError("checkpoint parameter directory size mismatch");
  const size_t data_start = kMagicLen + 4 + hlen;
  for (size_t i = 0; i < named.size(); ++i) {
    const json& e = dir[i];
    auto& [name, p] = named[i];
    if (e.at("name").get<std::string>() != name)
      throw IoError("checkpoint parameter order mismatch at " + name);
    if (e.at("shape").get<Shape>() != p->shape)
      throw IoError("checkpoint shape mismatch for " + name);
    const uint64_t off = e.at("offset").get<uint64_t>();
    const uint64_t need = off + static_cast<uint64_t>(p->size()) * 4;
    if (data_start + need > blob.size())
      throw IoError("checkpoint data truncated at " + name);
    const unsigned char* src = reinterpret_cast<const unsigned char*>(
        blob.data() + data_start + off);
    for (int64_t k = 0; k < p->size(); ++k) {
      uint32_t bits = static_cast<uint32_t>(src[4 * k]) |
                      static_cast<uint32_t>(src[4 * k + 1]) << 8 |
                      static_cast<uint32_t>(src[4 * k + 2]) << 16 |
                      static_cast<uint32_t>(src[4 * k + 3]) << 24;
      float f;
      std::memcpy(&f, &bits, 4);
      p->values()[k] = static_cast<double>(f);
    }
  }
  return net;
}

}  // namespace hrc
