#include "pd/loss.hpp"

#include <cmath>

namespace pd {

namespace {

double sign0(double x) {
  if (x > 0.0) return 1.0;
  if (x < 0.0) return -1.0;
  return 0.0;  // stationary at the kink
}

void block_all_except(LossReport* report,
                      std::initializer_list<const char*> kept) {
  for (const char* name :
       {blocks::kWeak, blocks::kTranslation, blocks::kJoints3d,
        blocks::kVertices}) {
    bool keep = false;
    for (const char* k : kept) keep = keep || std::string(name) == k;
    if (!keep) report->blocked.insert(name);
  }
}

}  // namespace

Json LossReport::to_json() const {
  Json j;
  j["value"] = value;
  j["grads"] = grads;
  j["blocked"] = blocked;
  return j;
}

LossReport weak_reproj_loss(std::span<const Vec3> joints3d,
                            const WeakPerspective& w,
                            std::span<const Vec2> joints2d_gt,
                            std::span<const double> joint_weights,
                            const CameraIntrinsics& k) {
  if (joints3d.size() != joints2d_gt.size() ||
      joints3d.size() != joint_weights.size()) {
    throw ShapeMismatch("weak_reproj_loss: joint count mismatch");
  }
  w.validate();
  for (double d : joint_weights) {
    if (!(d >= 0.1 && d <= 10.0)) {
      throw InvalidValue("weak_reproj_loss: distortion weight " +
                         std::to_string(d) + " outside [0.1, 10]");
    }
  }

  LossReport report;
  block_all_except(&report, {blocks::kWeak});
  double ds = 0.0, dtx = 0.0, dty = 0.0;
  const double half_h = k.height / 2.0;
  for (size_t i = 0; i < joints3d.size(); ++i) {
    const Vec2 proj = weak_project(joints3d[i], w, k);
    const double inv_d = 1.0 / joint_weights[i];
    const double su = sign0(proj.x() - joints2d_gt[i].x());
    const double sv = sign0(proj.y() - joints2d_gt[i].y());
    report.value += inv_d * (std::abs(proj.x() - joints2d_gt[i].x()) +
                             std::abs(proj.y() - joints2d_gt[i].y()));
    // u = (s*h/2)(x+tx) + cx, v = (s*h/2)(y+ty) + cy.
    ds += inv_d * (su * half_h * (joints3d[i].x() + w.tx) +
                   sv * half_h * (joints3d[i].y() + w.ty));
    dtx += inv_d * su * w.s * half_h;
    dty += inv_d * sv * w.s * half_h;
  }
  report.grads[blocks::kWeak] = {ds, dtx, dty};
  return report;
}

LossReport persp_reproj_loss(std::span<const Vec3> joints3d,
                             const Translation& t,
                             std::span<const Vec2> joints2d_gt,
                             const CameraIntrinsics& k) {
  if (joints3d.size() != joints2d_gt.size()) {
    throw ShapeMismatch("persp_reproj_loss: joint count mismatch");
  }

  LossReport report;
  block_all_except(&report, {blocks::kJoints3d});
  std::vector<double> grad(joints3d.size() * 3, 0.0);
  for (size_t i = 0; i < joints3d.size(); ++i) {
    const Vec2 proj = perspective_project(joints3d[i], t, k);
    const double den = joints3d[i].z() + t.Tz;
    const double su = sign0(proj.x() - joints2d_gt[i].x());
    const double sv = sign0(proj.y() - joints2d_gt[i].y());
    report.value += std::abs(proj.x() - joints2d_gt[i].x()) +
                    std::abs(proj.y() - joints2d_gt[i].y());
    grad[i * 3 + 0] = su * k.f / den;
    grad[i * 3 + 1] = sv * k.f / den;
    grad[i * 3 + 2] = -(su * k.f * (joints3d[i].x() + t.Tx) +
                        sv * k.f * (joints3d[i].y() + t.Ty)) /
                      (den * den);
  }
  report.grads[blocks::kJoints3d] = std::move(grad);
  return report;
}

LossReport translation_losses(const RasterBuffers& pred,
                              const RasterBuffers& gt,
                              const TranslationLossWeights& weights) {
  if (pred.width != gt.width || pred.height != gt.height) {
    throw ShapeMismatch("translation_losses: buffer shape mismatch");
  }

  double iuv_sq = 0.0, dist_sq = 0.0;
  size_t covered = 0;
  const double part_norm = static_cast<double>(kNumParts);
  for (size_t i = 0; i < pred.part.size(); ++i) {
    if (pred.part[i] == kNoPart && gt.part[i] == kNoPart) continue;
    ++covered;
    const double di = (pred.iuv[i * 3 + 0] - gt.iuv[i * 3 + 0]) / part_norm;
    const double du = pred.iuv[i * 3 + 1] - gt.iuv[i * 3 + 1];
    const double dv = pred.iuv[i * 3 + 2] - gt.iuv[i * 3 + 2];
    iuv_sq += di * di + du * du + dv * dv;
    const double dd = pred.distortion[i] - gt.distortion[i];
    dist_sq += dd * dd;
  }
  const double iuv_term = covered ? iuv_sq / (3.0 * covered) : 0.0;
  const double dist_term = covered ? dist_sq / covered : 0.0;
  const double z_term = std::abs(pred.tz - gt.tz);

  LossReport report;
  block_all_except(&report, {blocks::kTranslation});
  report.value = weights.iuv * iuv_term + weights.distortion * dist_term +
                 weights.z * z_term;
  report.grads[blocks::kTranslation] = {
      0.0, 0.0, weights.z * sign0(pred.tz - gt.tz)};
  return report;
}

LossReport mesh_losses(std::span<const Vec3> pred_vertices,
                       std::span<const Vec3> pred_joints,
                       std::span<const Vec3> gt_vertices,
                       std::span<const Vec3> gt_joints,
                       const MeshLossWeights& weights) {
  if (pred_vertices.size() != gt_vertices.size() ||
      pred_joints.size() != gt_joints.size()) {
    throw ShapeMismatch("mesh_losses: shape mismatch");
  }

  LossReport report;
  block_all_except(&report, {blocks::kVertices, blocks::kJoints3d});
  std::vector<double> grad_v(pred_vertices.size() * 3, 0.0);
  std::vector<double> grad_j(pred_joints.size() * 3, 0.0);

  double vertex_term = 0.0;
  for (size_t i = 0; i < pred_vertices.size(); ++i) {
    const Vec3 d = pred_vertices[i] - gt_vertices[i];
    vertex_term += d.cwiseAbs().sum();
    for (int c = 0; c < 3; ++c) {
      grad_v[i * 3 + c] =
          weights.vertices * sign0(d[c]) / pred_vertices.size();
    }
  }
  double joint_term = 0.0;
  for (size_t i = 0; i < pred_joints.size(); ++i) {
    const Vec3 d = pred_joints[i] - gt_joints[i];
    joint_term += d.cwiseAbs().sum();
    for (int c = 0; c < 3; ++c) {
      grad_j[i * 3 + c] = weights.joints * sign0(d[c]) / pred_joints.size();
    }
  }
  if (!pred_vertices.empty()) vertex_term /= pred_vertices.size();
  if (!pred_joints.empty()) joint_term /= pred_joints.size();

  report.value = weights.vertices * vertex_term + weights.joints * joint_term;
  report.grads[blocks::kVertices] = std::move(grad_v);
  report.grads[blocks::kJoints3d] = std::move(grad_j);
  return report;
}

void to_json(Json& j, const LossConfig& c) {
  j = Json{{"lambda_iuv", c.lambda_iuv},
           {"lambda_distortion", c.lambda_distortion},
           {"lambda_z", c.lambda_z},
           {"lambda_joints3d", c.lambda_joints3d},
           {"lambda_joints2d", c.lambda_joints2d},
           {"lambda_vertices", c.lambda_vertices}};
}

void from_json(const Json& j, LossConfig& c) {
  c.lambda_iuv = j.value("lambda_iuv", 1.0);
  c.lambda_distortion = j.value("lambda_distortion", 1.0);
  c.lambda_z = j.value("lambda_z", 1.0);
  c.lambda_joints3d = j.value("lambda_joints3d", 1.0);
  c.lambda_joints2d = j.value("lambda_joints2d", 0.01);
  c.lambda_vertices = j.value("lambda_vertices", 1.0);
}

}  // namespace pd
