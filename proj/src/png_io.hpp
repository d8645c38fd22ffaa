#ifndef HRC_PNG_IO_HPP
#define HRC_PNG_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace hrc {

struct GrayImage {
  int h = 0, w = 0;
  std::vector<uint8_t> px;  // row-major
};

struct RgbImage {
  int h = 0, w = 0;
  std::vector<uint8_t> px;  // row-major, 3 bytes per pixel
};

void write_gray_png(const std::string& path, const GrayImage& img);
void write_rgb_png(const std::string& path, const RgbImage& img);
GrayImage read_gray_png(const std::string& path);

}  // namespace hrc

#endif
