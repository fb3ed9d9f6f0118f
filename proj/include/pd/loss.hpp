#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "pd/geometry.hpp"
#include "pd/raster.hpp"
#include "pd/serialize.hpp"

namespace pd {

/// Parameter-block names used for gradient routing.
namespace blocks {
inline constexpr const char* kWeak = "weak";              // (s, tx, ty)
inline constexpr const char* kTranslation = "translation";  // (Tx, Ty, Tz)
inline constexpr const char* kJoints3d = "joints3d";
inline constexpr const char* kVertices = "vertices";
}  // namespace blocks

/// Scalar loss plus analytic gradients for exactly the parameter blocks the
/// loss is allowed to update; everything else is listed in `blocked` and
/// receives no gradient at all. The L1 subgradient at zero is taken as 0.
struct LossReport {
  double value = 0.0;
  std::map<std::string, std::vector<double>> grads;
  std::set<std::string> blocked;

  bool is_blocked(const std::string& block) const {
    return blocked.count(block) > 0;
  }
  Json to_json() const;
};

/// Distortion-weighted weak-perspective re-projection loss:
///   sum_i (1/d[i]) * |proj_w(J[i]) - gt[i]|_1
/// Gradients flow only into the weak block; the joints are detached.
LossReport weak_reproj_loss(std::span<const Vec3> joints3d,
                            const WeakPerspective& w,
                            std::span<const Vec2> joints2d_gt,
                            std::span<const double> joint_weights,
                            const CameraIntrinsics& k);

/// Perspective re-projection loss against full-image keypoints:
///   sum_i |proj_p(J[i] + T) - gt[i]|_1
/// Gradients flow only into the joints; the translation is detached.
LossReport persp_reproj_loss(std::span<const Vec3> joints3d,
                             const Translation& t,
                             std::span<const Vec2> joints2d_gt,
                             const CameraIntrinsics& k);

struct TranslationLossWeights {
  double iuv = 1.0;
  double distortion = 1.0;
  double z = 1.0;
};

/// Mean squared IUV / distortion error over the union of covered pixels
/// plus an L1 penalty on Tz. The IUV part index channel is normalized by
/// the part count so all three channels live on comparable scales.
LossReport translation_losses(const RasterBuffers& pred,
                              const RasterBuffers& gt,
                              const TranslationLossWeights& weights);

struct MeshLossWeights {
  double vertices = 1.0;
  double joints = 1.0;
};

/// Mean per-vertex and per-joint L1 losses with gradients to both blocks.
LossReport mesh_losses(std::span<const Vec3> pred_vertices,
                       std::span<const Vec3> pred_joints,
                       std::span<const Vec3> gt_vertices,
                       std::span<const Vec3> gt_joints,
                       const MeshLossWeights& weights);

/// Loss weights read from a JSON config; fields default when absent.
struct LossConfig {
  double lambda_iuv = 1.0;
  double lambda_distortion = 1.0;
  double lambda_z = 1.0;
  double lambda_joints3d = 1.0;
  double lambda_joints2d = 0.01;
  double lambda_vertices = 1.0;
};

void to_json(Json& j, const LossConfig& c);
void from_json(const Json& j, LossConfig& c);

}  // namespace pd
