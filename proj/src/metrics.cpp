#include "pd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include <Eigen/Dense>

#include "pd/body.hpp"

namespace pd {

void SimilarityTransform::validate() const {
  if (scale <= 0.0) throw InvalidValue("SimilarityTransform: scale <= 0");
  if ((rotation.transpose() * rotation - Mat3::Identity()).norm() > 1e-9) {
    throw InvalidValue("SimilarityTransform: rotation not orthonormal");
  }
  if (std::abs(rotation.determinant() - 1.0) > 1e-9) {
    throw InvalidValue("SimilarityTransform: rotation not proper");
  }
}

SimilarityTransform procrustes_align(std::span<const Vec3> src,
                                     std::span<const Vec3> dst) {
  if (src.size() != dst.size()) {
    throw ShapeMismatch("procrustes_align: point count mismatch");
  }
  const size_t n = src.size();
  if (n < 3) {
    throw DegenerateConfiguration("procrustes_align: need at least 3 points");
  }

  Vec3 mu_src = Vec3::Zero(), mu_dst = Vec3::Zero();
  for (size_t i = 0; i < n; ++i) {
    mu_src += src[i];
    mu_dst += dst[i];
  }
  mu_src /= static_cast<double>(n);
  mu_dst /= static_cast<double>(n);

  Mat3 cov = Mat3::Zero();
  double src_var = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const Vec3 x = src[i] - mu_src;
    const Vec3 y = dst[i] - mu_dst;
    cov += y * x.transpose();
    src_var += x.squaredNorm();
  }
  cov /= static_cast<double>(n);
  src_var /= static_cast<double>(n);
  if (src_var <= 1e-18) {
    throw DegenerateConfiguration("procrustes_align: source has no variance");
  }

  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vec3 d = Vec3::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) {
    d.z() = -1.0;  // reflection correction
  }
  SimilarityTransform out;
  out.rotation = svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();
  out.scale = svd.singularValues().dot(d) / src_var;
  if (out.scale <= 0.0) {
    // Degenerate anti-correlated clouds; fall back to a rigid fit.
    out.scale = 1e-12;
  }
  out.translation = mu_dst - out.scale * (out.rotation * mu_src);
  return out;
}

namespace {

double mean_distance_mm(std::span<const Vec3> a, std::span<const Vec3> b) {
  double sum = 0.0;
  for (size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]).norm();
  return 1000.0 * sum / static_cast<double>(a.size());
}

}  // namespace

double mpjpe(std::span<const Vec3> pred, std::span<const Vec3> gt) {
  if (pred.size() != gt.size() || pred.empty()) {
    throw ShapeMismatch("mpjpe: joint count mismatch");
  }
  double sum = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    sum += ((pred[i] - pred[0]) - (gt[i] - gt[0])).norm();
  }
  return 1000.0 * sum / static_cast<double>(pred.size());
}

double pa_mpjpe(std::span<const Vec3> pred, std::span<const Vec3> gt) {
  const SimilarityTransform t = procrustes_align(pred, gt);
  std::vector<Vec3> aligned;
  aligned.reserve(pred.size());
  for (const Vec3& p : pred) aligned.push_back(t.apply(p));
  return mean_distance_mm(aligned, gt);
}

double pve(std::span<const Vec3> pred_vertices,
           std::span<const Vec3> gt_vertices, const Vec3& pred_pelvis,
           const Vec3& gt_pelvis) {
  if (pred_vertices.size() != gt_vertices.size() || pred_vertices.empty()) {
    throw ShapeMismatch("pve: vertex count mismatch");
  }
  double sum = 0.0;
  for (size_t i = 0; i < pred_vertices.size(); ++i) {
    sum += ((pred_vertices[i] - pred_pelvis) - (gt_vertices[i] - gt_pelvis))
               .norm();
  }
  return 1000.0 * sum / static_cast<double>(pred_vertices.size());
}

double miou(std::span<const int> pred_part, std::span<const int> gt_part,
            int width, int height, IouMode mode) {
  const size_t n = static_cast<size_t>(width) * height;
  if (pred_part.size() != n || gt_part.size() != n) {
    throw ShapeMismatch("miou: image dimension mismatch");
  }

  const auto class_iou = [&](auto in_class) {
    size_t inter = 0, uni = 0;
    for (size_t i = 0; i < n; ++i) {
      const bool p = in_class(pred_part[i]);
      const bool g = in_class(gt_part[i]);
      inter += p && g;
      uni += p || g;
    }
    if (uni == 0) return 1.0;  // identical empty masks
    return static_cast<double>(inter) / static_cast<double>(uni);
  };

  if (mode == IouMode::kForeground) {
    const double fg = class_iou([](int p) { return p >= 0; });
    const double bg = class_iou([](int p) { return p < 0; });
    return 0.5 * (fg + bg);
  }

  // Parts: average over the classes present in the ground truth.
  double sum = 0.0;
  int classes = 0;
  for (int part = 0; part < kNumParts; ++part) {
    const bool present =
        std::any_of(gt_part.begin(), gt_part.end(),
                    [part](int p) { return p == part; });
    if (!present) continue;
    ++classes;
    sum += class_iou([part](int p) { return p == part; });
  }
  if (classes == 0) {
    const bool pred_empty = std::all_of(pred_part.begin(), pred_part.end(),
                                        [](int p) { return p < 0; });
    return pred_empty ? 1.0 : 0.0;
  }
  return sum / classes;
}

int assign_protocol(double tau, std::span<const double> thresholds) {
  if (thresholds.empty()) throw InvalidValue("assign_protocol: no thresholds");
  for (size_t i = 1; i < thresholds.size(); ++i) {
    if (thresholds[i] >= thresholds[i - 1]) {
      throw InvalidValue("assign_protocol: thresholds must strictly decrease");
    }
  }
  const int buckets = static_cast<int>(thresholds.size());
  for (int i = 0; i < buckets; ++i) {
    if (tau >= thresholds[i]) return buckets - i;
  }
  return 1;
}

void write_metric_csv(const std::string& path,
                      std::span<const MetricReport> reports) {
  std::vector<MetricReport> sorted(reports.begin(), reports.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const MetricReport& a, const MetricReport& b) {
              return a.id < b.id;
            });
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "id,mpjpe,pa_mpjpe,pve,miou,p_miou,tau,protocol\n";
  char buf[256];
  for (const MetricReport& r : sorted) {
    std::snprintf(buf, sizeof(buf), "%s,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%d\n",
                  r.id.c_str(), r.mpjpe_mm, r.pa_mpjpe_mm, r.pve_mm,
                  r.miou_fg, r.p_miou, r.tau, r.protocol);
    out << buf;
  }
  if (!out) throw IoError("write failed: " + path);
}

Json aggregate_by_protocol(std::span<const MetricReport> reports) {
  std::map<int, std::vector<const MetricReport*>> buckets;
  for (const MetricReport& r : reports) buckets[r.protocol].push_back(&r);

  Json out = Json::object();
  for (const auto& [protocol, rows] : buckets) {
    double mpj = 0, pa = 0, pv = 0, fg = 0, parts = 0, tau = 0;
    for (const MetricReport* r : rows) {
      mpj += r->mpjpe_mm;
      pa += r->pa_mpjpe_mm;
      pv += r->pve_mm;
      fg += r->miou_fg;
      parts += r->p_miou;
      tau += r->tau;
    }
    const double n = static_cast<double>(rows.size());
    out[std::to_string(protocol)] = {
        {"count", rows.size()},   {"mpjpe", mpj / n},
        {"pa_mpjpe", pa / n},     {"pve", pv / n},
        {"miou", fg / n},         {"p_miou", parts / n},
        {"mean_tau", tau / n},
    };
  }
  return out;
}

}  // namespace pd
