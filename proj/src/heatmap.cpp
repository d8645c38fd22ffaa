#include "heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "errors.hpp"

namespace hrc {

int GamConfig::radius() const {
  return kernel_radius > 0 ? kernel_radius
                           : static_cast<int>(std::ceil(3.0 * sigma));
}

std::vector<double> gaussian_kernel(double sigma, int radius) {
  if (sigma <= 0) throw ConfigError("gaussian_kernel: sigma must be > 0");
  if (radius < 0) throw ConfigError("gaussian_kernel: radius must be >= 0");
  const int side = 2 * radius + 1;
  std::vector<double> k(static_cast<size_t>(side) * side);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      k[static_cast<size_t>(dy + radius) * side + (dx + radius)] =
          std::exp(-(dx * dx + dy * dy) * inv);
  return k;
}

ActivationMap render_gam(const DotAnnotation& ann, int image_h, int image_w,
                         const GamConfig& cfg) {
  if (cfg.sigma <= 0) throw ConfigError("render_gam: sigma must be > 0");
  if (cfg.downscale < 1) throw ConfigError("render_gam: downscale must be >= 1");
  if (image_h % cfg.downscale != 0 || image_w % cfg.downscale != 0)
    throw ConfigError("render_gam: image extents not divisible by downscale");

  std::vector<double> full(static_cast<size_t>(image_h) * image_w, 0.0);
  const int r = cfg.radius();
  const double inv = 1.0 / (2.0 * cfg.sigma * cfg.sigma);
  for (const auto& [x, y] : ann.dots) {
    if (!(x >= 0 && x < image_w && y >= 0 && y < image_h))
      throw DataError("render_gam: dot (" + std::to_string(x) + "," +
                      std::to_string(y) + ") outside image");
    // pixel (i, j) has center (j + 0.5, i + 0.5)
    const double cx = x - 0.5, cy = y - 0.5;
    const int j0 = std::max(0, static_cast<int>(std::ceil(cx - r - 0.5)));
    const int j1 = std::min(image_w - 1,
                            static_cast<int>(std::floor(cx + r + 0.5)));
    const int i0 = std::max(0, static_cast<int>(std::ceil(cy - r - 0.5)));
    const int i1 = std::min(image_h - 1,
                            static_cast<int>(std::floor(cy + r + 0.5)));
    for (int i = i0; i <= i1; ++i) {
      const double dy = i - cy;
      for (int j = j0; j <= j1; ++j) {
        const double dx = j - cx;
        full[static_cast<size_t>(i) * image_w + j] +=
            std::exp(-(dx * dx + dy * dy) * inv);
      }
    }
  }

  const int s = cfg.downscale;
  ActivationMap m;
  m.h = image_h / s;
  m.w = image_w / s;
  m.stride = s;
  m.image_h = image_h;
  m.image_w = image_w;
  m.v.assign(static_cast<size_t>(m.h) * m.w, 0.0);
  const double cell_inv = 1.0 / (s * s);
  for (int by = 0; by < m.h; ++by)
    for (int bx = 0; bx < m.w; ++bx) {
      double sum = 0;
      for (int i = by * s; i < (by + 1) * s; ++i)
        for (int j = bx * s; j < (bx + 1) * s; ++j)
          sum += full[static_cast<size_t>(i) * image_w + j];
      m.at(by, bx) = sum * cell_inv;
    }
  return m;
}

ActivationMap normalize_map(const ActivationMap& m, double eps) {
  ActivationMap out = m;
  if (m.v.empty()) return out;
  const auto [mn_it, mx_it] = std::minmax_element(m.v.begin(), m.v.end());
  const double mn = *mn_it;
  const double inv = 1.0 / (*mx_it - mn + eps);
  for (double& v : out.v) v = (v - mn) * inv;
  return out;
}

}  // namespace hrc
