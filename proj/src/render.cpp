#include "render.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace hrc {

std::array<uint8_t, 3> heat_color(double t) {
  static const double anchors[5][3] = {{0, 0, 255},
                                       {0, 255, 255},
                                       {0, 255, 0},
                                       {255, 255, 0},
                                       {255, 0, 0}};
  t = std::clamp(t, 0.0, 1.0);
  const double pos = t * 4.0;
  const int lo = std::min(3, static_cast<int>(pos));
  const double f = pos - lo;
  std::array<uint8_t, 3> c;
  for (int k = 0; k < 3; ++k)
    c[k] = static_cast<uint8_t>(
        std::lround((1.0 - f) * anchors[lo][k] + f * anchors[lo + 1][k]));
  return c;
}

RgbImage overlay_heatmap(const GrayImage& image, const ActivationMap& map) {
  if (map.h * map.stride != image.h || map.w * map.stride != image.w)
    throw DataError("overlay: map does not cover the image extents");
  RgbImage out;
  out.h = image.h;
  out.w = image.w;
  out.px.resize(static_cast<size_t>(out.h) * out.w * 3);
  for (int y = 0; y < out.h; ++y)
    for (int x = 0; x < out.w; ++x) {
      const double v = map.at(y / map.stride, x / map.stride);
      const auto color = heat_color(v);
      const double gray = image.px[static_cast<size_t>(y) * image.w + x];
      uint8_t* px = &out.px[(static_cast<size_t>(y) * out.w + x) * 3];
      for (int k = 0; k < 3; ++k)
        px[k] = static_cast<uint8_t>(
            std::lround(0.5 * gray + 0.5 * color[k]));
    }
  return out;
}

}  // namespace hrc
