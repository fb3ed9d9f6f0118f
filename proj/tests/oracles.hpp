// Test-only oracles, kept independent of the library's rasterization path.
#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "pd/raster.hpp"
#include "pd/rng.hpp"

namespace pd::testing {

// Exhaustive pixel-center inclusion test over the whole image: counts, per
// pixel, how many triangles claim it under the documented top-left rule.
// No bounding boxes, no winding normalization shortcuts: vertices are
// reordered by explicit orientation test and every pixel is evaluated
// directly.
inline std::vector<int> oracle_coverage_count(
    std::span<const ScreenTriangle> triangles, int width, int height) {
  std::vector<int> count(static_cast<size_t>(width) * height, 0);

  const auto orient = [](const Vec2& a, const Vec2& b, const Vec2& c) {
    return (b.x() - a.x()) * (c.y() - a.y()) -
           (b.y() - a.y()) * (c.x() - a.x());
  };
  const auto top_or_left = [](const Vec2& a, const Vec2& b) {
    const double dx = b.x() - a.x();
    const double dy = b.y() - a.y();
    return (dy == 0.0 && dx > 0.0) || dy < 0.0;
  };

  for (const ScreenTriangle& tri : triangles) {
    Vec2 a = tri.p[0], b = tri.p[1], c = tri.p[2];
    const double area = orient(a, b, c);
    if (area == 0.0) continue;
    if (area < 0.0) std::swap(b, c);

    for (int row = 0; row < height; ++row) {
      for (int col = 0; col < width; ++col) {
        const Vec2 p{col + 0.5, row + 0.5};
        const double e0 = orient(b, c, p);
        const double e1 = orient(c, a, p);
        const double e2 = orient(a, b, p);
        const bool in0 = e0 > 0.0 || (e0 == 0.0 && top_or_left(b, c));
        const bool in1 = e1 > 0.0 || (e1 == 0.0 && top_or_left(c, a));
        const bool in2 = e2 > 0.0 || (e2 == 0.0 && top_or_left(a, b));
        if (in0 && in1 && in2) {
          count[static_cast<size_t>(row) * width + col] += 1;
        }
      }
    }
  }
  return count;
}

// Random triangle soup with coordinates quantized to 1/16 pixel so that all
// edge-function arithmetic is exact in double precision.
inline std::vector<ScreenTriangle> random_soup(Rng& rng, int triangles,
                                               int width, int height) {
  const auto coord = [&](double lo, double hi) {
    const double raw = rng.uniform(lo, hi);
    return std::round(raw * 16.0) / 16.0;
  };
  std::vector<ScreenTriangle> soup;
  for (int t = 0; t < triangles; ++t) {
    ScreenTriangle tri;
    for (int c = 0; c < 3; ++c) {
      tri.p[c] = {coord(-8.0, width + 8.0), coord(-8.0, height + 8.0)};
      tri.z[c] = rng.uniform(0.5, 5.0);
      tri.uv[c] = {rng.uniform01(), rng.uniform01()};
    }
    tri.part = static_cast<int>(rng.uniform_index(24));
    soup.push_back(tri);
  }
  return soup;
}

// Shared-edge tiling: a jittered grid of quads, each split along a valid
// diagonal. Adjacent triangles share edges exactly, no two overlap, so the
// top-left rule must cover every pixel of the union exactly once.
inline std::vector<ScreenTriangle> random_tiling(Rng& rng, int width,
                                                 int height) {
  const auto quantize = [](double v) { return std::round(v * 16.0) / 16.0; };
  const int cells = 6;
  const double spacing =
      std::min(width, height) / static_cast<double>(cells + 1);

  std::vector<Vec2> grid((cells + 1) * (cells + 1));
  for (int gy = 0; gy <= cells; ++gy) {
    for (int gx = 0; gx <= cells; ++gx) {
      const double jitter = spacing * 0.3;
      grid[gy * (cells + 1) + gx] = {
          quantize(spacing * 0.5 + gx * spacing +
                   rng.uniform(-jitter, jitter)),
          quantize(spacing * 0.5 + gy * spacing +
                   rng.uniform(-jitter, jitter))};
    }
  }

  std::vector<ScreenTriangle> tris;
  const auto push = [&](Vec2 a, Vec2 b, Vec2 c) {
    ScreenTriangle tri;
    tri.p = {a, b, c};
    tri.z = {1.0, 1.0, 1.0};
    tri.uv = {Vec2{0, 0}, Vec2{0, 0}, Vec2{0, 0}};
    tri.part = static_cast<int>(tris.size()) % 24;
    tris.push_back(tri);
  };
  const auto orient = [](const Vec2& a, const Vec2& b, const Vec2& c) {
    return (b.x() - a.x()) * (c.y() - a.y()) -
           (b.y() - a.y()) * (c.x() - a.x());
  };

  for (int gy = 0; gy < cells; ++gy) {
    for (int gx = 0; gx < cells; ++gx) {
      const Vec2 p00 = grid[gy * (cells + 1) + gx];
      const Vec2 p10 = grid[gy * (cells + 1) + gx + 1];
      const Vec2 p01 = grid[(gy + 1) * (cells + 1) + gx];
      const Vec2 p11 = grid[(gy + 1) * (cells + 1) + gx + 1];
      // A diagonal is usable when it keeps both halves of the (possibly
      // non-convex) quad consistently oriented.
      const bool diag00_11_ok = orient(p00, p10, p11) > 0.0 &&
                                orient(p00, p11, p01) > 0.0;
      const bool diag10_01_ok = orient(p00, p10, p01) > 0.0 &&
                                orient(p10, p11, p01) > 0.0;
      bool use_first = diag00_11_ok;
      if (diag00_11_ok && diag10_01_ok) use_first = rng.uniform01() < 0.5;
      if (use_first) {
        push(p00, p10, p11);
        push(p00, p11, p01);
      } else if (diag10_01_ok) {
        push(p00, p10, p01);
        push(p10, p11, p01);
      }
    }
  }
  return tris;
}

// Camera-space ray / triangle-plane intersection: returns the camera-space
// depth and (u,v) attribute at a pixel center, bypassing screen-space
// interpolation entirely.
struct RayHit {
  double depth;
  Vec2 uv;
};

inline std::optional<RayHit> raycast_triangle(
    const Vec3 cam[3], const Vec2 uv[3], double pixel_x, double pixel_y,
    const CameraIntrinsics& k) {
  const Vec3 dir{(pixel_x - k.cx) / k.f, (pixel_y - k.cy) / k.f, 1.0};
  const Vec3 e1 = cam[1] - cam[0];
  const Vec3 e2 = cam[2] - cam[0];
  // Moller-Trumbore with the ray origin at the camera center (0,0,0);
  // dir.z == 1, so the ray parameter t is the camera-space depth.
  const Vec3 h = dir.cross(e2);
  const double det = e1.dot(h);
  if (std::abs(det) < 1e-14) return std::nullopt;
  const Vec3 s = -cam[0];
  const double u = s.dot(h) / det;
  const Vec3 q = s.cross(e1);
  const double v = dir.dot(q) / det;
  const double t = e2.dot(q) / det;
  if (t <= 0.0) return std::nullopt;
  return RayHit{t, (1.0 - u - v) * uv[0] + u * uv[1] + v * uv[2]};
}

}  // namespace pd::testing
