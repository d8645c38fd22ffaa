#include "data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "png_io.hpp"

namespace hrc {

namespace fs = std::filesystem;
using nlohmann::json;

void SyntheticConfig::validate() const {
  if (height < 8 || width < 8) throw ConfigError("image extents too small");
  if (count_min < 0 || count_max < count_min)
    throw ConfigError("bad count_range");
  if (radius_min <= 0 || radius_max < radius_min)
    throw ConfigError("bad radius_range");
  auto in01 = [](double a, double b) { return a >= 0 && b <= 1 && a <= b; };
  if (!in01(intensity_min, intensity_max) ||
      !in01(hard_intensity_min, hard_intensity_max))
    throw ConfigError("intensity ranges must lie within [0,1]");
  if (hard_fraction < 0 || hard_fraction > 1)
    throw ConfigError("hard_fraction must be in [0,1]");
  if (distractor_min < 0 || distractor_max < distractor_min)
    throw ConfigError("bad distractor_count_range");
  if (background_level < 0 || background_level > 1)
    throw ConfigError("background_level must be in [0,1]");
  if (min_separation < 0) throw ConfigError("min_separation must be >= 0");
  if (2.0 * (radius_max + 1.0) >= std::min(height, width))
    throw ConfigError("object geometry does not fit the image");
}

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

struct Placement {
  double x, y;
};

double dist2(const Placement& a, const Placement& b) {
  return (a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y);
}

// Smooth bilinear noise field in [0, level].
std::vector<double> background_field(std::mt19937_64& rng, int h, int w,
                                     double level) {
  const int cell = 8;
  const int gh = h / cell + 2, gw = w / cell + 2;
  std::uniform_real_distribution<double> u(0.0, level);
  std::vector<double> grid(static_cast<size_t>(gh) * gw);
  for (double& g : grid) g = u(rng);
  std::vector<double> out(static_cast<size_t>(h) * w);
  for (int y = 0; y < h; ++y) {
    const double gy = static_cast<double>(y) / cell;
    const int y0 = static_cast<int>(gy);
    const double fy = gy - y0;
    for (int x = 0; x < w; ++x) {
      const double gx = static_cast<double>(x) / cell;
      const int x0 = static_cast<int>(gx);
      const double fx = gx - x0;
      const double a = grid[static_cast<size_t>(y0) * gw + x0];
      const double b = grid[static_cast<size_t>(y0) * gw + x0 + 1];
      const double c = grid[static_cast<size_t>(y0 + 1) * gw + x0];
      const double d = grid[static_cast<size_t>(y0 + 1) * gw + x0 + 1];
      out[static_cast<size_t>(y) * w + x] =
          (1 - fy) * ((1 - fx) * a + fx * b) + fy * ((1 - fx) * c + fx * d);
    }
  }
  return out;
}

void composite_max(std::vector<double>& img, int w, int y, int x, double v) {
  double& px = img[static_cast<size_t>(y) * w + x];
  px = std::max(px, v);
}

void draw_disk(std::vector<double>& img, int h, int w, double cx, double cy,
               double r, double intensity) {
  const int x0 = std::max(0, static_cast<int>(std::floor(cx - r - 1)));
  const int x1 = std::min(w - 1, static_cast<int>(std::ceil(cx + r + 1)));
  const int y0 = std::max(0, static_cast<int>(std::floor(cy - r - 1)));
  const int y1 = std::min(h - 1, static_cast<int>(std::ceil(cy + r + 1)));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double d = std::hypot(x + 0.5 - cx, y + 0.5 - cy);
      const double edge = std::clamp(r - d + 0.5, 0.0, 1.0);  // ~1px soft rim
      if (edge > 0) composite_max(img, w, y, x, intensity * edge);
    }
}

void draw_ring(std::vector<double>& img, int h, int w, double cx, double cy,
               double r, double thickness, double intensity) {
  const double reach = r + thickness + 1;
  const int x0 = std::max(0, static_cast<int>(std::floor(cx - reach)));
  const int x1 = std::min(w - 1, static_cast<int>(std::ceil(cx + reach)));
  const int y0 = std::max(0, static_cast<int>(std::floor(cy - reach)));
  const int y1 = std::min(h - 1, static_cast<int>(std::ceil(cy + reach)));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double d = std::hypot(x + 0.5 - cx, y + 0.5 - cy);
      const double edge = std::clamp(thickness - std::abs(d - r) + 0.5, 0.0, 1.0);
      if (edge > 0) composite_max(img, w, y, x, intensity * edge);
    }
}

void draw_bar(std::vector<double>& img, int h, int w, double cx, double cy,
              double angle, double half_len, double half_width,
              double intensity) {
  const double ux = std::cos(angle), uy = std::sin(angle);
  const double reach = half_len + half_width + 1;
  const int x0 = std::max(0, static_cast<int>(std::floor(cx - reach)));
  const int x1 = std::min(w - 1, static_cast<int>(std::ceil(cx + reach)));
  const int y0 = std::max(0, static_cast<int>(std::floor(cy - reach)));
  const int y1 = std::min(h - 1, static_cast<int>(std::ceil(cy + reach)));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double px = x + 0.5 - cx, py = y + 0.5 - cy;
      const double along = std::clamp(px * ux + py * uy, -half_len, half_len);
      const double d = std::hypot(px - along * ux, py - along * uy);
      const double edge = std::clamp(half_width - d + 0.5, 0.0, 1.0);
      if (edge > 0) composite_max(img, w, y, x, intensity * edge);
    }
}

std::string sample_id(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "s%05d", index);
  return buf;
}

}  // namespace

Sample generate_sample(const SyntheticConfig& cfg, int index) {
  cfg.validate();
  std::mt19937_64 rng(splitmix64(cfg.seed) ^ splitmix64(0xC0DE + index));

  Sample s;
  s.h = cfg.height;
  s.w = cfg.width;
  s.id = sample_id(index);

  std::uniform_int_distribution<int> count_dist(cfg.count_min, cfg.count_max);
  std::uniform_int_distribution<int> distract_dist(cfg.distractor_min,
                                                   cfg.distractor_max);
  const int n_objects = count_dist(rng);
  const int n_distractors = distract_dist(rng);

  s.image = background_field(rng, s.h, s.w, cfg.background_level);

  const double margin = cfg.radius_max + 2.0;
  std::uniform_real_distribution<double> px(margin, cfg.width - margin);
  std::uniform_real_distribution<double> py(margin, cfg.height - margin);
  const double sep2 = cfg.min_separation * cfg.min_separation;

  std::vector<Placement> centers;
  auto place = [&](const char* kind) {
    for (int attempt = 0; attempt < 500; ++attempt) {
      Placement c{px(rng), py(rng)};
      bool ok = true;
      for (const Placement& o : centers)
        if (dist2(c, o) < sep2) {
          ok = false;
          break;
        }
      if (ok) {
        centers.push_back(c);
        return c;
      }
    }
    throw DataError(std::string("unsatisfiable ") + kind +
                    " placement in sample " + s.id +
                    "; lower counts or min_separation");
  };

  std::uniform_real_distribution<double> radius_dist(cfg.radius_min,
                                                     cfg.radius_max);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < n_objects; ++i) {
    const Placement c = place("object");
    const double r = radius_dist(rng);
    const bool hard = unit(rng) < cfg.hard_fraction;
    std::uniform_real_distribution<double> intensity(
        hard ? cfg.hard_intensity_min : cfg.intensity_min,
        hard ? cfg.hard_intensity_max : cfg.intensity_max);
    draw_disk(s.image, s.h, s.w, c.x, c.y, r, intensity(rng));
    s.annotation.dots.emplace_back(c.x, c.y);
  }

  std::uniform_real_distribution<double> intensity(cfg.intensity_min,
                                                   cfg.intensity_max);
  for (int i = 0; i < n_distractors; ++i) {
    const Placement c = place("distractor");
    const double v = intensity(rng);
    if (unit(rng) < 0.5) {
      std::uniform_real_distribution<double> rr(2.5, 5.5);
      draw_ring(s.image, s.h, s.w, c.x, c.y, rr(rng), 1.2, v);
    } else {
      std::uniform_real_distribution<double> ang(0.0, 3.14159265358979);
      std::uniform_real_distribution<double> hl(4.0, 7.0);
      std::uniform_real_distribution<double> hw(1.0, 1.6);
      draw_bar(s.image, s.h, s.w, c.x, c.y, ang(rng), hl(rng), hw(rng), v);
    }
  }

  for (double& v : s.image) v = std::clamp(v, 0.0, 1.0);
  return s;
}

void generate_dataset(const SyntheticConfig& cfg, int n_samples,
                      const std::string& out_dir) {
  cfg.validate();
  if (n_samples < 1) throw ConfigError("n_samples must be >= 1");
  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "images", ec);
  if (ec) throw IoError("cannot create dataset directory: " + out_dir);

  std::ofstream ann(fs::path(out_dir) / "annotations.jsonl",
                    std::ios::trunc);
  if (!ann) throw IoError("cannot write annotations.jsonl in " + out_dir);

  for (int i = 0; i < n_samples; ++i) {
    Sample s = generate_sample(cfg, i);
    GrayImage img;
    img.h = s.h;
    img.w = s.w;
    img.px.resize(s.image.size());
    for (size_t k = 0; k < s.image.size(); ++k)
      img.px[k] = static_cast<uint8_t>(std::lround(s.image[k] * 255.0));
    const std::string rel = "images/" + s.id + ".png";
    write_gray_png((fs::path(out_dir) / rel).string(), img);

    json dots = json::array();
    for (const auto& [x, y] : s.annotation.dots)
      dots.push_back(json::array({x, y}));
    ann << json{{"id", s.id}, {"image", rel}, {"dots", dots}}.dump() << "\n";
  }
  ann.close();
  if (!ann) throw IoError("write failed: annotations.jsonl");

  json manifest{{"format_version", 1},
                {"n_samples", n_samples},
                {"seed", cfg.seed},
                {"config",
                 {{"height", cfg.height},
                  {"width", cfg.width},
                  {"count_min", cfg.count_min},
                  {"count_max", cfg.count_max},
                  {"radius_min", cfg.radius_min},
                  {"radius_max", cfg.radius_max},
                  {"intensity_min", cfg.intensity_min},
                  {"intensity_max", cfg.intensity_max},
                  {"hard_fraction", cfg.hard_fraction},
                  {"hard_intensity_min", cfg.hard_intensity_min},
                  {"hard_intensity_max", cfg.hard_intensity_max},
                  {"distractor_min", cfg.distractor_min},
                  {"distractor_max", cfg.distractor_max},
                  {"background_level", cfg.background_level},
                  {"min_separation", cfg.min_separation}}}};
  std::ofstream mf(fs::path(out_dir) / "manifest.json", std::ios::trunc);
  if (!mf) throw IoError("cannot write manifest.json in " + out_dir);
  mf << manifest.dump(2) << "\n";
}

std::vector<Sample> load_dataset(const std::string& dir) {
  std::ifstream mf(fs::path(dir) / "manifest.json");
  if (!mf) throw IoError("missing manifest.json in " + dir);
  json manifest;
  try {
    mf >> manifest;
  } catch (const json::exception& e) {
    throw IoError("malformed manifest.json: " + std::string(e.what()));
  }
  const int n_samples = manifest.at("n_samples").get<int>();

  std::ifstream ann(fs::path(dir) / "annotations.jsonl");
  if (!ann) throw IoError("missing annotations.jsonl in " + dir);

  std::vector<Sample> samples;
  std::string line;
  while (std::getline(ann, line)) {
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw IoError("malformed annotation record: " + std::string(e.what()));
    }
    Sample s;
    s.id = rec.at("id").get<std::string>();
    const std::string rel = rec.at("image").get<std::string>();
    const std::string img_path = (fs::path(dir) / rel).string();
    if (!fs::exists(img_path))
      throw IoError("annotation " + s.id + " references missing image " +
                    img_path);
    GrayImage img = read_gray_png(img_path);
    s.h = img.h;
    s.w = img.w;
    s.image.resize(img.px.size());
    for (size_t k = 0; k < img.px.size(); ++k)
      s.image[k] = img.px[k] / 255.0;
    for (const auto& d : rec.at("dots")) {
      const double x = d.at(0).get<double>(), y = d.at(1).get<double>();
      if (!(x >= 0 && x < s.w && y >= 0 && y < s.h))
        throw DataError("dot outside image bounds in sample " + s.id);
      s.annotation.dots.emplace_back(x, y);
    }
    samples.push_back(std::move(s));
  }
  if (static_cast<int>(samples.size()) != n_samples)
    throw IoError("annotations.jsonl has " + std::to_string(samples.size()) +
                  " records, manifest says " + std::to_string(n_samples));
  return samples;
}

std::pair<std::vector<Sample>, std::vector<Sample>> split(
    std::vector<Sample> samples, double val_fraction, SplitMode mode,
    uint64_t shuffle_seed) {
  if (!(val_fraction > 0 && val_fraction < 1))
    throw ConfigError("val_fraction must be in (0, 1)");
  const size_t n = samples.size();
  const size_t n_train =
      static_cast<size_t>(std::ceil(n * (1.0 - val_fraction)));
  if (n_train == 0 || n_train == n)
    throw ConfigError("split would leave an empty side");
  if (mode == SplitMode::kShuffled) {
    std::mt19937_64 rng(splitmix64(shuffle_seed));
    std::shuffle(samples.begin(), samples.end(), rng);
  }
  std::vector<Sample> train(samples.begin(), samples.begin() + n_train);
  std::vector<Sample> val(samples.begin() + n_train, samples.end());
  return {std::move(train), std::move(val)};
}

}  // namespace hrc
