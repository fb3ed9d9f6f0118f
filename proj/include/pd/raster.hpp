#pragma once

#include <array>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "pd/body.hpp"
#include "pd/geometry.hpp"
#include "pd/serialize.hpp"

namespace pd {

inline constexpr int kNoPart = -1;

/// Depth / part / IUV / distortion images over a pixel grid.
/// Background sentinels: depth = +inf, part = kNoPart, iuv = 0 (the I
/// channel stores part_id + 1 so part 0 stays distinguishable from
/// background), distortion = 0.
struct RasterBuffers {
  int width = 0;
  int height = 0;
  double tz = 0.0;  // pelvis depth the distortion channel is relative to
  bool empty = true;
  std::vector<double> depth;
  std::vector<int> part;
  std::vector<double> iuv;  // 3 channels, pixel-interleaved
  std::vector<double> distortion;

  static RasterBuffers background(int width, int height, double tz);

  size_t index(int row, int col) const {
    return static_cast<size_t>(row) * width + col;
  }
  bool covered(int row, int col) const {
    return part[index(row, col)] != kNoPart;
  }
  void validate() const;
};

/// Screen-space triangle: projected vertices, camera-space depths (> 0),
/// part id and per-vertex UV.
struct ScreenTriangle {
  std::array<Vec2, 3> p;
  std::array<double, 3> z;
  std::array<Vec2, 3> uv;
  int part = 0;
};

struct RasterOptions {
  int threads = 1;  // tile parallelism; output is bit-identical for any N
};

/// Z-buffer fill of screen-space triangles. Top-left fill rule, pixel
/// centers at (col+0.5, row+0.5), perspective-correct depth and UV, ties at
/// equal depth resolved toward the lower triangle index.
RasterBuffers rasterize_screen(std::span<const ScreenTriangle> triangles,
                               int width, int height, double tz,
                               const RasterOptions& options = {});

/// Projects the body and rasterizes it. `vertices` are posed body vertices;
/// throws PointBehindCamera if any camera-space depth is <= epsilon. An
/// all-background result sets buffers.empty rather than failing.
RasterBuffers rasterize(const ArticulatedBody& body,
                        std::span<const Vec3> vertices, const Translation& t,
                        const CameraIntrinsics& k,
                        const RasterOptions& options = {});

/// Rest-pose convenience overload.
RasterBuffers rasterize(const ArticulatedBody& body, const Translation& t,
                        const CameraIntrinsics& k,
                        const RasterOptions& options = {});

/// tau: maximum distortion over covered pixels. Throws EmptyRaster.
double max_distortion_scale(const RasterBuffers& buffers);

/// Scalar channel warped into the unit UV square.
struct UvMap {
  int resolution = 0;
  std::vector<double> value;
  std::vector<double> depth;     // depth of the winning contributor
  std::vector<uint8_t> covered;

  size_t index(int row, int col) const {
    return static_cast<size_t>(row) * resolution + col;
  }
};

/// Splats a pixel-aligned channel into UV space at the buffers' per-pixel
/// (U,V); when two pixels land on one texel the smaller-depth one wins.
UvMap warp_to_uv(std::span<const double> channel, const RasterBuffers& buffers,
                 int resolution = 64);

struct UvSample {
  double value = 1.0;
  bool covered = false;
};

/// Bilinear sample over covered texels; uncovered regions fall back to 1.
UvSample sample_uv(const UvMap& map, const Vec2& uv);
std::vector<UvSample> sample_uv(const UvMap& map, std::span<const Vec2> uvs);

struct DistortionSample {
  double value = 1.0;
  bool fell_back = false;  // background or out-of-image joint
};

/// Bilinear sample of the distortion image at joint pixels, clamped to
/// [0.1, 10]; background and out-of-image joints yield 1 with a flag.
std::vector<DistortionSample> sample_distortion_at_joints(
    const RasterBuffers& buffers, std::span<const Vec2> joints2d);

/// On-disk form: depth.pfm, distortion.pfm, iuv.png and meta.json inside
/// `dir` (created if needed). Extra fields are merged into meta.json.
void save_raster_buffers(const std::string& dir, const RasterBuffers& buffers,
                         const CameraIntrinsics& k,
                         const nlohmann::json& extra_meta = nullptr);
struct LoadedRaster {
  RasterBuffers buffers;
  CameraIntrinsics intrinsics;
};
LoadedRaster load_raster_buffers(const std::string& dir);

}  // namespace pd
