#ifndef HRC_HEATMAP_HPP
#define HRC_HEATMAP_HPP

#include <utility>
#include <vector>

namespace hrc {

// Object-center dots, origin top-left, pixel units.
struct DotAnnotation {
  std::vector<std::pair<double, double>> dots;  // (x, y)
  int count() const { return static_cast<int>(dots.size()); }
};

struct GamConfig {
  double sigma = 2.0;
  int kernel_radius = 0;  // 0 = auto, ceil(3 * sigma)
  int downscale = 8;      // model CAM stride
  int radius() const;
};

// 2-D real map at CAM resolution with its provenance.
struct ActivationMap {
  int h = 0, w = 0;
  std::vector<double> v;
  int stride = 1;
  int image_h = 0, image_w = 0;

  double& at(int y, int x) { return v[static_cast<size_t>(y) * w + x]; }
  double at(int y, int x) const { return v[static_cast<size_t>(y) * w + x]; }
};

// Amplitude-normalized Gaussian sampled at integer offsets, peak 1 at the
// center of the (2r+1) x (2r+1) grid.
std::vector<double> gaussian_kernel(double sigma, int radius);

// One kernel splat per dot at full image resolution (additive overlap,
// truncated at borders), then mean-pooled down to CAM resolution. The
// Gaussian is evaluated at each pixel center's true offset from the dot, so
// sub-pixel dot positions are honored exactly.
ActivationMap render_gam(const DotAnnotation& ann, int image_h, int image_w,
                         const GamConfig& cfg);

// (m - min) / (max - min + eps).
ActivationMap normalize_map(const ActivationMap& m, double eps);

}  // namespace hrc

#endif
