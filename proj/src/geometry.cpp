#include "pd/geometry.hpp"

#include <cmath>

namespace pd {

namespace {

bool all_finite(std::initializer_list<double> xs) {
  for (double x : xs) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

void CameraIntrinsics::validate() const {
  if (!all_finite({f, cx, cy, width, height})) {
    throw InvalidValue("CameraIntrinsics: non-finite field");
  }
  if (f <= 0.0) throw InvalidValue("CameraIntrinsics: f must be > 0");
  if (width <= 0.0 || height <= 0.0) {
    throw InvalidValue("CameraIntrinsics: image size must be > 0");
  }
  if (cx < 0.0 || cx > width || cy < 0.0 || cy > height) {
    throw InvalidValue("CameraIntrinsics: principal point outside image");
  }
}

void WeakPerspective::validate() const {
  if (!all_finite({s, tx, ty})) {
    throw InvalidValue("WeakPerspective: non-finite field");
  }
  if (s <= 0.0) throw InvalidValue("WeakPerspective: s must be > 0");
}

void Translation::validate() const {
  if (!all_finite({Tx, Ty, Tz})) {
    throw InvalidValue("Translation: non-finite field");
  }
  if (Tz <= 0.0 || Tz > 10.0) {
    throw InvalidValue("Translation: Tz must lie in (0, 10]");
  }
}

void CropBox::validate() const {
  if (!all_finite({cx, cy, w, h, W, H})) {
    throw InvalidValue("CropBox: non-finite field");
  }
  if (w <= 0.0 || h <= 0.0 || W <= 0.0 || H <= 0.0) {
    throw InvalidValue("CropBox: sizes must be > 0");
  }
  if (w != h) throw InvalidValue("CropBox: crop must be square (w == h)");
}

Vec2 perspective_project(const Vec3& point, const Translation& t,
                         const CameraIntrinsics& k) {
  const double depth = point.z() + t.Tz;
  if (depth <= kDepthEpsilon) {
    throw PointBehindCamera("perspective_project: camera-space depth " +
                            std::to_string(depth) + " <= epsilon");
  }
  return {k.f * (point.x() + t.Tx) / depth + k.cx,
          k.f * (point.y() + t.Ty) / depth + k.cy};
}

std::vector<Vec2> perspective_project(std::span<const Vec3> points,
                                      const Translation& t,
                                      const CameraIntrinsics& k) {
  std::vector<Vec2> out;
  out.reserve(points.size());
  for (const Vec3& p : points) out.push_back(perspective_project(p, t, k));
  return out;
}

Vec2 weak_project(const Vec3& point, const WeakPerspective& w,
                  const CameraIntrinsics& k) {
  w.validate();
  const Translation equivalent{w.tx, w.ty,
                               2.0 * kWeakFocalPx / (w.s * k.height)};
  CameraIntrinsics weak_cam = k;
  weak_cam.f = kWeakFocalPx;
  const Vec3 flattened{point.x(), point.y(), 0.0};
  return perspective_project(flattened, equivalent, weak_cam);
}

std::vector<Vec2> weak_project(std::span<const Vec3> points,
                               const WeakPerspective& w,
                               const CameraIntrinsics& k) {
  std::vector<Vec2> out;
  out.reserve(points.size());
  for (const Vec3& p : points) out.push_back(weak_project(p, w, k));
  return out;
}

double focal_from_weak(double s, double h, double tz) {
  return s * h * tz / 2.0;
}

double tz_from_focal(double f, double h, double s) {
  return 2.0 * f / (h * s);
}

std::pair<double, double> crop_to_full_translation(const WeakPerspective& w,
                                                   const CropBox& box) {
  w.validate();
  box.validate();
  const double tx = w.tx + (2.0 * box.cx - box.W) / (box.w * w.s);
  const double ty = w.ty + (2.0 * box.cy - box.H) / (box.h * w.s);
  return {tx, ty};
}

Vec2 ndc_screen_convert(const Vec2& point, const CameraIntrinsics& k,
                        NdcDirection direction) {
  const double half = k.height / 2.0;
  if (direction == NdcDirection::kScreenToNdc) {
    return {(point.x() - k.cx) / half, (point.y() - k.cy) / half};
  }
  return {point.x() * half + k.cx, point.y() * half + k.cy};
}

std::vector<Vec2> ndc_screen_convert(std::span<const Vec2> points,
                                     const CameraIntrinsics& k,
                                     NdcDirection direction) {
  std::vector<Vec2> out;
  out.reserve(points.size());
  for (const Vec2& p : points) out.push_back(ndc_screen_convert(p, k, direction));
  return out;
}

}  // namespace pd
