#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pd/body.hpp"
#include "pd/raster.hpp"
#include "pd/rng.hpp"
#include "pd/serialize.hpp"

namespace pd {

double fov_deg_from_focal_mm(double focal_mm, double sensor_height_mm);

/// Random camera/scene sampling parameters. Focal length is drawn
/// uniformly in millimeters and converted to pixels for the configured
/// image size using the fixed sensor height.
struct CameraSampleConfig {
  double focal_mm_min = 7.0;
  double focal_mm_max = 102.0;
  double sensor_height_mm = 24.0;
  double fov_min_deg = 10.0;
  double fov_max_deg = 140.0;
  double distance_min = 0.5;  // sphere radius range, meters
  double distance_max = 10.0;
  double elevation_min_deg = -30.0;
  double elevation_max_deg = 30.0;
  double azimuth_min_deg = 0.0;
  double azimuth_max_deg = 360.0;
  int image_width = 512;
  int image_height = 512;
  uint64_t seed = 0;

  void validate() const;
};

void to_json(Json& j, const CameraSampleConfig& c);
void from_json(const Json& j, CameraSampleConfig& c);

/// One sampled camera: the body sits at the sphere center (the origin),
/// the camera sits on the sphere surface facing the center.
struct SceneSample {
  CameraIntrinsics intrinsics;
  Mat3 rotation = Mat3::Identity();  // world -> camera
  Vec3 camera_position = Vec3::Zero();
  uint64_t body_pose_seed = 0;
  double distance = 0.0;
  double focal_mm = 0.0;
  double fov_deg = 0.0;
  double elevation_deg = 0.0;
  double azimuth_deg = 0.0;

  void validate() const;
};

SceneSample sample_scene(const CameraSampleConfig& config, Rng& rng);

/// Bounded random articulation derived from a pose seed: root yaw plus
/// small rotations on hips, knees, shoulders and elbows.
Pose sample_pose(int num_joints, uint64_t pose_seed);

struct DollyZoomResult {
  double tau = 0.0;
  double error_px = 0.0;
  WeakPerspective weak;
  double focal_px = 0.0;  // perspective focal used for the comparison
};

/// Fits a weak camera to the perspective projection of the joints at
/// distance tz (least squares on pixel coordinates) and reports the mean
/// per-joint pixel discrepancy between the two projections plus tau.
DollyZoomResult dolly_zoom_error(std::span<const Vec3> joints3d, double tz,
                                 double image_height);

struct SceneRecord {
  int id = 0;
  std::string dir;
  double tau = 0.0;
  int protocol = 1;
  double distance = 0.0;
  double focal_px = 0.0;
  double fov_deg = 0.0;
};

/// Renders n sampled scenes under out_dir (scenes/NNNN/...) with ground
/// truth and writes index.json. Samples derive per-index RNG streams from
/// the config seed, so any thread count produces identical bytes.
std::vector<SceneRecord> generate_dataset(const CameraSampleConfig& config,
                                          int n, const std::string& out_dir,
                                          int threads = 1);

std::vector<SceneRecord> load_dataset_index(const std::string& out_dir);

/// Ground truth for one generated scene.
struct Scene {
  Json meta;
  RasterBuffers buffers;
  CameraIntrinsics intrinsics;
  Translation translation;
  std::vector<Vec3> joints3d;   // camera frame, pelvis at the origin
  std::vector<Vec2> joints2d;   // full-image pixels
  double tau = 0.0;
  int protocol = 1;
};

Scene load_scene(const std::string& scene_dir);

}  // namespace pd
