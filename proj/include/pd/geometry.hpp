#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pd/common.hpp"

namespace pd {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Focal length used by the weak-perspective formulation, in pixels.
/// It cancels out of the projected coordinates but is kept explicit so the
/// weak model is an ordinary perspective camera at a large distance.
inline constexpr double kWeakFocalPx = 5000.0;

/// Pinhole intrinsics. Focal lengths are stored in pixels everywhere;
/// ndc_screen_convert translates at module boundaries that want NDC.
struct CameraIntrinsics {
  double f = 1000.0;  // pixels
  double cx = 112.0;  // principal point, pixels
  double cy = 112.0;
  double width = 224.0;  // image size, pixels
  double height = 224.0;

  void validate() const;
};

/// Orthographic scale + normalized 2D offsets (s, tx, ty).
struct WeakPerspective {
  double s = 1.0;
  double tx = 0.0;
  double ty = 0.0;

  void validate() const;
};

/// Pelvis translation in camera space, meters. Tz is restricted to (0, 10].
struct Translation {
  double Tx = 0.0;
  double Ty = 0.0;
  double Tz = 2.0;

  void validate() const;
};

/// Square crop inside a full image. (cx, cy) is the crop center in
/// full-image pixels, (w, h) the crop size, (W, H) the full-image size.
struct CropBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;
  double W = 0.0;
  double H = 0.0;

  void validate() const;
};

/// u = f*(x+Tx)/(z+Tz) + cx, v = f*(y+Ty)/(z+Tz) + cy, image y down.
/// Throws PointBehindCamera if any z+Tz <= kDepthEpsilon.
Vec2 perspective_project(const Vec3& point, const Translation& t,
                         const CameraIntrinsics& k);
std::vector<Vec2> perspective_project(std::span<const Vec3> points,
                                      const Translation& t,
                                      const CameraIntrinsics& k);

/// Weak-perspective projection: the point's own z is discarded and the
/// equivalent perspective camera (f = kWeakFocalPx, Tz = 2f/(s*h)) is used.
Vec2 weak_project(const Vec3& point, const WeakPerspective& w,
                  const CameraIntrinsics& k);
std::vector<Vec2> weak_project(std::span<const Vec3> points,
                               const WeakPerspective& w,
                               const CameraIntrinsics& k);

/// f = s*h*Tz/2 pixels.
double focal_from_weak(double s, double h, double tz);

/// Tz = 2f/(h*s) meters. Exact inverse of focal_from_weak.
double tz_from_focal(double f, double h, double s);

/// Crop-frame (tx, ty) to full-image (Tx, Ty):
///   Tx = tx + (2*cx - W)/(w*s),  Ty = ty + (2*cy - H)/(h*s).
std::pair<double, double> crop_to_full_translation(const WeakPerspective& w,
                                                   const CropBox& box);

enum class NdcDirection { kScreenToNdc, kNdcToScreen };

/// x_ndc = 2*(u - cx)/h, y_ndc = 2*(v - cy)/h, and the exact inverse.
Vec2 ndc_screen_convert(const Vec2& point, const CameraIntrinsics& k,
                        NdcDirection direction);
std::vector<Vec2> ndc_screen_convert(std::span<const Vec2> points,
                                     const CameraIntrinsics& k,
                                     NdcDirection direction);

}  // namespace pd
