#include "options.hpp"

#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace hrc {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

Options::Options() {
  values_ = {
      // synthetic dataset
      {"image_size", "64"},
      {"count_min", "2"},
      {"count_max", "12"},
      {"radius_min", "3"},
      {"radius_max", "5"},
      {"intensity_min", "0.7"},
      {"intensity_max", "1.0"},
      {"hard_fraction", "0.2"},
      {"hard_intensity_min", "0.25"},
      {"hard_intensity_max", "0.4"},
      {"distractor_min", "0"},
      {"distractor_max", "4"},
      {"background_level", "0.1"},
      {"min_separation", "6"},
      {"data_seed", "0"},
      // model
      {"in_channels", "1"},
      {"block_channels", "16,32,64,64"},
      {"convs_per_block", "2"},
      {"kernel_size", "3"},
      {"pooled_blocks", "3"},
      {"prelu_init", "0.25"},
      {"model_seed", "0"},
      // training
      {"lr", "1e-4"},
      {"weight_decay", "1e-4"},
      {"lr_drop_epoch", "10"},
      {"lr_drop_factor", "0.1"},
      {"epochs", "100"},
      {"passes_per_epoch", "10"},
      {"batch_size", "4"},
      {"lambda_hr", "1.0"},
      {"val_fraction", "0.1"},
      {"train_seed", "0"},
      // ground-truth activation map
      {"sigma", "2.0"},
      {"kernel_radius", "0"},
      {"norm_eps", "1e-8"},
      {"mass_radius", "6"},
  };
}

void Options::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected `key = value`");
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void Options::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end())
    throw ConfigError("unknown config key '" + key + "'");
  if (value.empty()) throw ConfigError("empty value for key '" + key + "'");
  const std::string old = it->second;
  it->second = value;
  // reject malformed values immediately rather than at first use
  try {
    if (key == "block_channels") {
      std::stringstream ss(value);
      std::string part;
      int n = 0;
      while (std::getline(ss, part, ',')) {
        size_t pos = 0;
        int width = 0;
        try {
          width = std::stoi(trim(part), &pos);
        } catch (const std::exception&) {
          pos = 0;
        }
        if (pos != trim(part).size() || width < 1)
          throw ConfigError("block_channels: '" + part +
                            "' is not a positive integer");
        ++n;
      }
      if (n != 4)
        throw ConfigError("block_channels must list exactly 4 widths");
    } else if (key == "data_seed" || key == "model_seed" ||
               key == "train_seed") {
      get_u64(key);
    } else if (key == "image_size" || key == "count_min" ||
               key == "count_max" || key == "distractor_min" ||
               key == "distractor_max" || key == "in_channels" ||
               key == "convs_per_block" || key == "kernel_size" ||
               key == "pooled_blocks" || key == "lr_drop_epoch" ||
               key == "epochs" || key == "passes_per_epoch" ||
               key == "batch_size" || key == "kernel_radius") {
      get_int(key);
    } else {
      get_double(key);
    }
  } catch (const ConfigError&) {
    it->second = old;
    throw;
  }
}

const std::string& Options::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end())
    throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

double Options::get_double(const std::string& key) const {
  const std::string& v = get(key);
  size_t pos = 0;
  double d;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': '" + v + "' is not a number");
  }
  if (pos != v.size())
    throw ConfigError("key '" + key + "': '" + v + "' is not a number");
  return d;
}

int Options::get_int(const std::string& key) const {
  const std::string& v = get(key);
  size_t pos = 0;
  long d;
  try {
    d = std::stol(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': '" + v + "' is not an integer");
  }
  if (pos != v.size())
    throw ConfigError("key '" + key + "': '" + v + "' is not an integer");
  return static_cast<int>(d);
}

uint64_t Options::get_u64(const std::string& key) const {
  const std::string& v = get(key);
  size_t pos = 0;
  unsigned long long d;
  try {
    d = std::stoull(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': '" + v + "' is not an integer");
  }
  if (pos != v.size())
    throw ConfigError("key '" + key + "': '" + v + "' is not an integer");
  return d;
}

SyntheticConfig Options::synthetic() const {
  SyntheticConfig c;
  c.height = c.width = get_int("image_size");
  c.count_min = get_int("count_min");
  c.count_max = get_int("count_max");
  c.radius_min = get_double("radius_min");
  c.radius_max = get_double("radius_max");
  c.intensity_min = get_double("intensity_min");
  c.intensity_max = get_double("intensity_max");
  c.hard_fraction = get_double("hard_fraction");
  c.hard_intensity_min = get_double("hard_intensity_min");
  c.hard_intensity_max = get_double("hard_intensity_max");
  c.distractor_min = get_int("distractor_min");
  c.distractor_max = get_int("distractor_max");
  c.background_level = get_double("background_level");
  c.min_separation = get_double("min_separation");
  c.seed = get_u64("data_seed");
  c.validate();
  return c;
}

ModelConfig Options::model() const {
  ModelConfig c;
  c.in_channels = get_int("in_channels");
  std::stringstream ss(get("block_channels"));
  std::string part;
  std::vector<int> widths;
  while (std::getline(ss, part, ',')) widths.push_back(std::stoi(trim(part)));
  if (widths.size() != 4)
    throw ConfigError("block_channels must list exactly 4 widths");
  std::copy(widths.begin(), widths.end(), c.block_channels.begin());
  c.convs_per_block = get_int("convs_per_block");
  c.kernel_size = get_int("kernel_size");
  c.pooled_blocks = get_int("pooled_blocks");
  c.prelu_init = get_double("prelu_init");
  c.seed = get_u64("model_seed");
  c.validate();
  return c;
}

TrainConfig Options::trainer() const {
  TrainConfig c;
  c.lr = get_double("lr");
  c.weight_decay = get_double("weight_decay");
  c.lr_drop_epoch = get_int("lr_drop_epoch");
  c.lr_drop_factor = get_double("lr_drop_factor");
  c.epochs = get_int("epochs");
  c.passes_per_epoch = get_int("passes_per_epoch");
  c.batch_size = get_int("batch_size");
  c.lambda_hr = get_double("lambda_hr");
  c.seed = get_u64("train_seed");
  c.gam.sigma = get_double("sigma");
  c.gam.kernel_radius = get_int("kernel_radius");
  c.norm_eps = get_double("norm_eps");
  c.mass_radius = get_double("mass_radius");
  c.validate();
  return c;
}

}  // namespace hrc
