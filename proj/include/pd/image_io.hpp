#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pd/common.hpp"

namespace pd {

struct FloatImage {
  int width = 0;
  int height = 0;
  std::vector<float> pixels;  // row-major, top-down
};

struct Rgb16Image {
  int width = 0;
  int height = 0;
  std::vector<uint16_t> pixels;  // interleaved RGB, row-major, top-down
};

/// Single-channel PFM, 32-bit float, little-endian (scale -1), rows stored
/// top-down.
void write_pfm(const std::string& path, int width, int height,
               std::span<const float> pixels);
FloatImage read_pfm(const std::string& path);

/// 16-bit RGB PNG.
void write_png16(const std::string& path, int width, int height,
                 std::span<const uint16_t> rgb);
Rgb16Image read_png16(const std::string& path);

}  // namespace pd
