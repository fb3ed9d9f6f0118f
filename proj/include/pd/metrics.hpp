#pragma once

#include <span>
#include <string>
#include <vector>

#include "pd/geometry.hpp"
#include "pd/serialize.hpp"

namespace pd {

/// Similarity transform p -> scale * rotation * p + translation with a
/// proper rotation (det = +1).
struct SimilarityTransform {
  double scale = 1.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return scale * (rotation * p) + translation; }
  void validate() const;
};

/// Least-squares similarity alignment of src onto dst (closed form via the
/// centered cross-covariance and its SVD, reflection corrected).
/// Throws DegenerateConfiguration for fewer than 3 points or zero variance.
SimilarityTransform procrustes_align(std::span<const Vec3> src,
                                     std::span<const Vec3> dst);

/// Mean per-joint position error in millimeters, both sets centered on
/// their pelvis (joint 0) first.
double mpjpe(std::span<const Vec3> pred, std::span<const Vec3> gt);

/// MPJPE after Procrustes alignment of pred onto gt, millimeters.
double pa_mpjpe(std::span<const Vec3> pred, std::span<const Vec3> gt);

/// Mean per-vertex error in millimeters after centering each mesh on its
/// own pelvis position.
double pve(std::span<const Vec3> pred_vertices,
           std::span<const Vec3> gt_vertices, const Vec3& pred_pelvis,
           const Vec3& gt_pelvis);

enum class IouMode {
  kForeground,  // mean of foreground and background IoU
  kParts,       // mean IoU over part classes present in the ground truth
};

/// IoU over part-label images; background is any negative label.
double miou(std::span<const int> pred_part, std::span<const int> gt_part,
            int width, int height, IouMode mode);

/// Default tau thresholds (strictly decreasing).
inline constexpr std::array<double, 5> kSynthTauThresholds{3.0, 2.6, 2.2,
                                                           1.8, 1.4};
inline constexpr std::array<double, 3> kRealTauThresholds{1.8, 1.4, 1.0};

/// Protocol bucket for a max distortion scale: thresholds are inclusive
/// lower bounds, numbering starts at 1 for the least-distorted bucket, and
/// anything below every threshold lands in bucket 1.
int assign_protocol(double tau, std::span<const double> thresholds);

struct MetricReport {
  std::string id;
  double mpjpe_mm = 0.0;
  double pa_mpjpe_mm = 0.0;
  double pve_mm = 0.0;
  double miou_fg = 1.0;
  double p_miou = 1.0;
  double tau = 1.0;
  int protocol = 1;
};

/// CSV with one row per sample, sorted by id, 6 significant digits.
void write_metric_csv(const std::string& path,
                      std::span<const MetricReport> reports);

/// Per-protocol means (and counts) as JSON.
Json aggregate_by_protocol(std::span<const MetricReport> reports);

}  // namespace pd
