#include "pd/raster.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <thread>

#include "pd/image_io.hpp"
#include "pd/serialize.hpp"

namespace pd {

RasterBuffers RasterBuffers::background(int width, int height, double tz) {
  RasterBuffers b;
  b.width = width;
  b.height = height;
  b.tz = tz;
  const size_t n = static_cast<size_t>(width) * height;
  b.depth.assign(n, std::numeric_limits<double>::infinity());
  b.part.assign(n, kNoPart);
  b.iuv.assign(n * 3, 0.0);
  b.distortion.assign(n, 0.0);
  return b;
}

void RasterBuffers::validate() const {
  const size_t n = static_cast<size_t>(width) * height;
  if (depth.size() != n || part.size() != n || distortion.size() != n ||
      iuv.size() != n * 3) {
    throw ShapeMismatch("RasterBuffers: buffer size mismatch");
  }
  for (size_t i = 0; i < n; ++i) {
    if (part[i] != kNoPart) {
      if (!(depth[i] > 0.0) || !std::isfinite(depth[i])) {
        throw InvalidValue("RasterBuffers: covered pixel without finite depth");
      }
      if (!(distortion[i] > 0.0)) {
        throw InvalidValue("RasterBuffers: covered pixel without distortion");
      }
    } else {
      if (std::isfinite(depth[i]) || distortion[i] != 0.0) {
        throw InvalidValue("RasterBuffers: background sentinel violated");
      }
    }
  }
}

namespace {

double edge_function(const Vec2& a, const Vec2& b, const Vec2& p) {
  return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
}

// Top-left rule, y pointing down: a zero edge counts as inside when it is
// horizontal pointing right (top) or pointing up (left).
bool edge_accepts(double value, const Vec2& a, const Vec2& b) {
  if (value > 0.0) return true;
  if (value < 0.0) return false;
  const double dx = b.x() - a.x();
  const double dy = b.y() - a.y();
  return (dy == 0.0 && dx > 0.0) || dy < 0.0;
}

void fill_rows(std::span<const ScreenTriangle> triangles, int width,
               int row_begin, int row_end, RasterBuffers* out) {
  for (const ScreenTriangle& tri : triangles) {
    Vec2 v0 = tri.p[0], v1 = tri.p[1], v2 = tri.p[2];
    double z0 = tri.z[0], z1 = tri.z[1], z2 = tri.z[2];
    Vec2 uv0 = tri.uv[0], uv1 = tri.uv[1], uv2 = tri.uv[2];
    double area = edge_function(v0, v1, v2);
    if (area == 0.0) continue;  // degenerate
    if (area < 0.0) {
      std::swap(v1, v2);
      std::swap(z1, z2);
      std::swap(uv1, uv2);
      area = -area;
    }

    const double xmin = std::min({v0.x(), v1.x(), v2.x()});
    const double xmax = std::max({v0.x(), v1.x(), v2.x()});
    const double ymin = std::min({v0.y(), v1.y(), v2.y()});
    const double ymax = std::max({v0.y(), v1.y(), v2.y()});
    // Clamp in double before the int cast; projected coordinates can be
    // arbitrarily large for grazing triangles.
    const int col_lo = static_cast<int>(
        std::clamp(std::floor(xmin - 0.5), 0.0, static_cast<double>(width)));
    const int col_hi = static_cast<int>(std::clamp(
        std::ceil(xmax - 0.5), -1.0, static_cast<double>(width - 1)));
    const int r_lo = static_cast<int>(
        std::clamp(std::floor(ymin - 0.5), static_cast<double>(row_begin),
                   static_cast<double>(row_end)));
    const int r_hi = static_cast<int>(
        std::clamp(std::ceil(ymax - 0.5), static_cast<double>(row_begin - 1),
                   static_cast<double>(row_end - 1)));

    const double w0 = 1.0 / z0, w1 = 1.0 / z1, w2 = 1.0 / z2;
    for (int row = r_lo; row <= r_hi; ++row) {
      for (int col = col_lo; col <= col_hi; ++col) {
        const Vec2 pix{col + 0.5, row + 0.5};
        const double e0 = edge_function(v1, v2, pix);
        const double e1 = edge_function(v2, v0, pix);
        const double e2 = edge_function(v0, v1, pix);
        if (!edge_accepts(e0, v1, v2) || !edge_accepts(e1, v2, v0) ||
            !edge_accepts(e2, v0, v1)) {
          continue;
        }
        const double l0 = e0 / area, l1 = e1 / area, l2 = e2 / area;
        const double inv_z = l0 * w0 + l1 * w1 + l2 * w2;
        const double depth = 1.0 / inv_z;
        const size_t idx = out->index(row, col);
        if (depth < out->depth[idx]) {
          out->depth[idx] = depth;
          out->part[idx] = tri.part;
          const double u =
              (l0 * uv0.x() * w0 + l1 * uv1.x() * w1 + l2 * uv2.x() * w2) *
              depth;
          const double v =
              (l0 * uv0.y() * w0 + l1 * uv1.y() * w1 + l2 * uv2.y() * w2) *
              depth;
          out->iuv[idx * 3 + 0] = static_cast<double>(tri.part + 1);
          out->iuv[idx * 3 + 1] = u;
          out->iuv[idx * 3 + 2] = v;
          out->distortion[idx] = out->tz / depth;
        }
      }
    }
  }
}

}  // namespace

RasterBuffers rasterize_screen(std::span<const ScreenTriangle> triangles,
                               int width, int height, double tz,
                               const RasterOptions& options) {
  if (width <= 0 || height <= 0) {
    throw InvalidValue("rasterize_screen: image size must be positive");
  }
  RasterBuffers out = RasterBuffers::background(width, height, tz);

  const int threads = std::max(1, options.threads);
  if (threads == 1 || height < 2 * threads) {
    fill_rows(triangles, width, 0, height, &out);
  } else {
    // Disjoint row bands; every band scans all triangles in index order, so
    // the result matches the single-threaded fill exactly.
    std::vector<std::thread> pool;
    const int band = (height + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int lo = t * band;
      const int hi = std::min(height, lo + band);
      if (lo >= hi) break;
      pool.emplace_back(fill_rows, triangles, width, lo, hi, &out);
    }
    for (auto& th : pool) th.join();
  }

  out.empty = std::all_of(out.part.begin(), out.part.end(),
                          [](int p) { return p == kNoPart; });
  return out;
}

RasterBuffers rasterize(const ArticulatedBody& body,
                        std::span<const Vec3> vertices, const Translation& t,
                        const CameraIntrinsics& k,
                        const RasterOptions& options) {
  if (vertices.size() != body.vertices.size()) {
    throw ShapeMismatch("rasterize: vertex count mismatch");
  }
  k.validate();

  std::vector<Vec2> projected(vertices.size());
  std::vector<double> depths(vertices.size());
  for (size_t i = 0; i < vertices.size(); ++i) {
    depths[i] = vertices[i].z() + t.Tz;
    if (depths[i] <= kDepthEpsilon) {
      throw PointBehindCamera("rasterize: vertex " + std::to_string(i) +
                              " has camera-space depth " +
                              std::to_string(depths[i]));
    }
    projected[i] = perspective_project(vertices[i], t, k);
  }

  std::vector<ScreenTriangle> tris;
  tris.reserve(body.faces.size());
  for (const auto& face : body.faces) {
    ScreenTriangle tri;
    for (int c = 0; c < 3; ++c) {
      tri.p[c] = projected[face[c]];
      tri.z[c] = depths[face[c]];
      tri.uv[c] = body.uv[face[c]];
    }
    tri.part = body.part_id[face[0]];
    tris.push_back(tri);
  }
  return rasterize_screen(tris, static_cast<int>(k.width),
                          static_cast<int>(k.height), t.Tz, options);
}

RasterBuffers rasterize(const ArticulatedBody& body, const Translation& t,
                        const CameraIntrinsics& k,
                        const RasterOptions& options) {
  return rasterize(body, body.vertices, t, k, options);
}

double max_distortion_scale(const RasterBuffers& buffers) {
  if (buffers.empty) {
    throw EmptyRaster("max_distortion_scale: no covered pixels");
  }
  double tau = 0.0;
  for (size_t i = 0; i < buffers.part.size(); ++i) {
    if (buffers.part[i] != kNoPart) tau = std::max(tau, buffers.distortion[i]);
  }
  return tau;
}

UvMap warp_to_uv(std::span<const double> channel, const RasterBuffers& buffers,
                 int resolution) {
  if (channel.size() != buffers.part.size()) {
    throw ShapeMismatch("warp_to_uv: channel size mismatch");
  }
  if (resolution <= 0) throw InvalidValue("warp_to_uv: bad resolution");
  UvMap map;
  map.resolution = resolution;
  const size_t n = static_cast<size_t>(resolution) * resolution;
  map.value.assign(n, 0.0);
  map.depth.assign(n, std::numeric_limits<double>::infinity());
  map.covered.assign(n, 0);

  for (int row = 0; row < buffers.height; ++row) {
    for (int col = 0; col < buffers.width; ++col) {
      const size_t idx = buffers.index(row, col);
      if (buffers.part[idx] == kNoPart) continue;
      const double u = buffers.iuv[idx * 3 + 1];
      const double v = buffers.iuv[idx * 3 + 2];
      const int tc = std::clamp(static_cast<int>(std::floor(u * resolution)),
                                0, resolution - 1);
      const int tr = std::clamp(static_cast<int>(std::floor(v * resolution)),
                                0, resolution - 1);
      const size_t t = map.index(tr, tc);
      if (buffers.depth[idx] < map.depth[t]) {
        map.depth[t] = buffers.depth[idx];
        map.value[t] = channel[idx];
        map.covered[t] = 1;
      }
    }
  }
  return map;
}

namespace {

// Shared bilinear-with-coverage kernel: weights of uncovered taps are
// dropped and the rest renormalized; all-uncovered reports no coverage.
template <typename CoveredFn, typename ValueFn>
UvSample bilinear_masked(double x, double y, int width, int height,
                         CoveredFn covered, ValueFn value) {
  const double gx = x - 0.5;
  const double gy = y - 0.5;
  const int x0 = static_cast<int>(std::floor(gx));
  const int y0 = static_cast<int>(std::floor(gy));
  const double fx = gx - x0;
  const double fy = gy - y0;

  double total = 0.0, acc = 0.0;
  for (int dy = 0; dy < 2; ++dy) {
    for (int dx = 0; dx < 2; ++dx) {
      const int cx = std::clamp(x0 + dx, 0, width - 1);
      const int cy = std::clamp(y0 + dy, 0, height - 1);
      if (!covered(cy, cx)) continue;
      const double w = (dx ? fx : 1.0 - fx) * (dy ? fy : 1.0 - fy);
      total += w;
      acc += w * value(cy, cx);
    }
  }
  if (total <= 0.0) return {1.0, false};
  return {acc / total, true};
}

}  // namespace

UvSample sample_uv(const UvMap& map, const Vec2& uv) {
  const double x = uv.x() * map.resolution;
  const double y = uv.y() * map.resolution;
  return bilinear_masked(
      x, y, map.resolution, map.resolution,
      [&](int r, int c) { return map.covered[map.index(r, c)] != 0; },
      [&](int r, int c) { return map.value[map.index(r, c)]; });
}

std::vector<UvSample> sample_uv(const UvMap& map, std::span<const Vec2> uvs) {
  std::vector<UvSample> out;
  out.reserve(uvs.size());
  for (const Vec2& uv : uvs) out.push_back(sample_uv(map, uv));
  return out;
}

std::vector<DistortionSample> sample_distortion_at_joints(
    const RasterBuffers& buffers, std::span<const Vec2> joints2d) {
  std::vector<DistortionSample> out;
  out.reserve(joints2d.size());
  for (const Vec2& j : joints2d) {
    DistortionSample sample;
    const bool inside = j.x() >= 0.0 && j.x() <= buffers.width &&
                        j.y() >= 0.0 && j.y() <= buffers.height;
    if (inside) {
      const UvSample s = bilinear_masked(
          j.x(), j.y(), buffers.width, buffers.height,
          [&](int r, int c) { return buffers.part[buffers.index(r, c)] !=
                                     kNoPart; },
          [&](int r, int c) { return buffers.distortion[buffers.index(r, c)]; });
      sample.value = s.value;
      sample.fell_back = !s.covered;
    } else {
      sample.fell_back = true;
    }
    sample.value = std::clamp(sample.value, 0.1, 10.0);
    out.push_back(sample);
  }
  return out;
}

void save_raster_buffers(const std::string& dir, const RasterBuffers& buffers,
                         const CameraIntrinsics& k, const Json& extra_meta) {
  std::filesystem::create_directories(dir);
  const size_t n = static_cast<size_t>(buffers.width) * buffers.height;

  std::vector<float> depth(n), dist(n);
  for (size_t i = 0; i < n; ++i) {
    depth[i] = static_cast<float>(buffers.depth[i]);
    dist[i] = static_cast<float>(buffers.distortion[i]);
  }
  write_pfm(dir + "/depth.pfm", buffers.width, buffers.height, depth);
  write_pfm(dir + "/distortion.pfm", buffers.width, buffers.height, dist);

  std::vector<uint16_t> rgb(n * 3);
  for (size_t i = 0; i < n; ++i) {
    rgb[i * 3 + 0] = static_cast<uint16_t>(buffers.part[i] + 1);
    rgb[i * 3 + 1] =
        static_cast<uint16_t>(std::lround(buffers.iuv[i * 3 + 1] * 65535.0));
    rgb[i * 3 + 2] =
        static_cast<uint16_t>(std::lround(buffers.iuv[i * 3 + 2] * 65535.0));
  }
  write_png16(dir + "/iuv.png", buffers.width, buffers.height, rgb);

  Json meta;
  meta["Tz"] = buffers.tz;
  meta["intrinsics"] = k;
  meta["empty"] = buffers.empty;
  meta["conventions"] = {
      {"depth_background", "+inf"},
      {"distortion_background", 0.0},
      {"part_encoding", "R = part_id + 1, 0 = background"},
      {"uv_encoding", "G,B = round(65535 * U,V)"},
      {"row_order", "top-down"},
  };
  if (extra_meta.is_object()) meta.update(extra_meta);
  save_json_file(dir + "/meta.json", meta);
}

LoadedRaster load_raster_buffers(const std::string& dir) {
  const Json meta = load_json_file(dir + "/meta.json");
  LoadedRaster out;
  try {
    out.intrinsics = meta.at("intrinsics").get<CameraIntrinsics>();
    out.buffers.tz = meta.at("Tz").get<double>();
  } catch (const Json::exception& e) {
    throw IoError(dir + "/meta.json: " + e.what());
  }

  const FloatImage depth = read_pfm(dir + "/depth.pfm");
  const FloatImage dist = read_pfm(dir + "/distortion.pfm");
  const Rgb16Image iuv = read_png16(dir + "/iuv.png");
  if (depth.width != dist.width || depth.width != iuv.width ||
      depth.height != dist.height || depth.height != iuv.height) {
    throw IoError(dir + ": raster file dimensions disagree");
  }

  RasterBuffers& b = out.buffers;
  b.width = depth.width;
  b.height = depth.height;
  const size_t n = static_cast<size_t>(b.width) * b.height;
  b.depth.resize(n);
  b.part.resize(n);
  b.iuv.resize(n * 3);
  b.distortion.resize(n);
  b.empty = true;
  for (size_t i = 0; i < n; ++i) {
    b.depth[i] = depth.pixels[i];
    b.distortion[i] = dist.pixels[i];
    b.part[i] = static_cast<int>(iuv.pixels[i * 3 + 0]) - 1;
    b.iuv[i * 3 + 0] = static_cast<double>(iuv.pixels[i * 3 + 0]);
    b.iuv[i * 3 + 1] = iuv.pixels[i * 3 + 1] / 65535.0;
    b.iuv[i * 3 + 2] = iuv.pixels[i * 3 + 2] / 65535.0;
    if (b.part[i] != kNoPart) b.empty = false;
  }
  return out;
}

}  // namespace pd
