#ifndef HRC_RENDER_HPP
#define HRC_RENDER_HPP

#include <array>

#include "heatmap.hpp"
#include "png_io.hpp"

namespace hrc {

// 5-anchor linear colormap: blue, cyan, green, yellow, red at
// t = 0, 0.25, 0.5, 0.75, 1.
std::array<uint8_t, 3> heat_color(double t);

// Grayscale input alpha-blended (0.5) with the colored map, which is
// upscaled nearest-neighbor from CAM resolution to the image extents.
// `map` is expected to be normalized to [0, 1].
RgbImage overlay_heatmap(const GrayImage& image, const ActivationMap& map);

}  // namespace hrc

#endif
