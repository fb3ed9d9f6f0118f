#include "pd/synth.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <thread>

#include <Eigen/Geometry>

#include "pd/metrics.hpp"

namespace pd {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

}  // namespace

double fov_deg_from_focal_mm(double focal_mm, double sensor_height_mm) {
  return 2.0 * std::atan(sensor_height_mm / (2.0 * focal_mm)) / kDegToRad;
}

void CameraSampleConfig::validate() const {
  if (focal_mm_min <= 0.0 || focal_mm_max < focal_mm_min) {
    throw InvalidValue("CameraSampleConfig: bad focal range");
  }
  if (sensor_height_mm <= 0.0) {
    throw InvalidValue("CameraSampleConfig: bad sensor height");
  }
  if (distance_min <= 0.0 || distance_max < distance_min) {
    throw InvalidValue("CameraSampleConfig: bad distance range");
  }
  if (elevation_max_deg < elevation_min_deg ||
      std::abs(elevation_min_deg) > 85.0 ||
      std::abs(elevation_max_deg) > 85.0) {
    throw InvalidValue("CameraSampleConfig: bad elevation range");
  }
  if (azimuth_max_deg < azimuth_min_deg) {
    throw InvalidValue("CameraSampleConfig: bad azimuth range");
  }
  if (image_width <= 0 || image_height <= 0) {
    throw InvalidValue("CameraSampleConfig: bad image size");
  }
  // The focal range must map inside the configured FoV band.
  const double fov_hi = fov_deg_from_focal_mm(focal_mm_min, sensor_height_mm);
  const double fov_lo = fov_deg_from_focal_mm(focal_mm_max, sensor_height_mm);
  if (fov_lo < fov_min_deg || fov_hi > fov_max_deg) {
    throw InvalidValue("CameraSampleConfig: focal range leaves the FoV band");
  }
}

void to_json(Json& j, const CameraSampleConfig& c) {
  j = Json{{"focal_mm_min", c.focal_mm_min},
           {"focal_mm_max", c.focal_mm_max},
           {"sensor_height_mm", c.sensor_height_mm},
           {"fov_min_deg", c.fov_min_deg},
           {"fov_max_deg", c.fov_max_deg},
           {"distance_min", c.distance_min},
           {"distance_max", c.distance_max},
           {"elevation_min_deg", c.elevation_min_deg},
           {"elevation_max_deg", c.elevation_max_deg},
           {"azimuth_min_deg", c.azimuth_min_deg},
           {"azimuth_max_deg", c.azimuth_max_deg},
           {"image_width", c.image_width},
           {"image_height", c.image_height},
           {"seed", c.seed}};
}

void from_json(const Json& j, CameraSampleConfig& c) {
  const CameraSampleConfig defaults;
  c.focal_mm_min = j.value("focal_mm_min", defaults.focal_mm_min);
  c.focal_mm_max = j.value("focal_mm_max", defaults.focal_mm_max);
  c.sensor_height_mm = j.value("sensor_height_mm", defaults.sensor_height_mm);
  c.fov_min_deg = j.value("fov_min_deg", defaults.fov_min_deg);
  c.fov_max_deg = j.value("fov_max_deg", defaults.fov_max_deg);
  c.distance_min = j.value("distance_min", defaults.distance_min);
  c.distance_max = j.value("distance_max", defaults.distance_max);
  c.elevation_min_deg = j.value("elevation_min_deg", defaults.elevation_min_deg);
  c.elevation_max_deg = j.value("elevation_max_deg", defaults.elevation_max_deg);
  c.azimuth_min_deg = j.value("azimuth_min_deg", defaults.azimuth_min_deg);
  c.azimuth_max_deg = j.value("azimuth_max_deg", defaults.azimuth_max_deg);
  c.image_width = j.value("image_width", defaults.image_width);
  c.image_height = j.value("image_height", defaults.image_height);
  c.seed = j.value("seed", defaults.seed);
}

void SceneSample::validate() const {
  intrinsics.validate();
  // The forward axis must pass through the sphere center (the origin).
  const Vec3 forward = rotation.row(2);
  const Vec3 rejected =
      camera_position - camera_position.dot(forward) * forward;
  if (rejected.norm() > 1e-6) {
    throw InvalidValue("SceneSample: camera does not face the sphere center");
  }
}

SceneSample sample_scene(const CameraSampleConfig& config, Rng& rng) {
  config.validate();
  SceneSample sample;
  sample.focal_mm = rng.uniform(config.focal_mm_min, config.focal_mm_max);
  sample.distance = rng.uniform(config.distance_min, config.distance_max);
  sample.elevation_deg =
      rng.uniform(config.elevation_min_deg, config.elevation_max_deg);
  sample.azimuth_deg =
      rng.uniform(config.azimuth_min_deg, config.azimuth_max_deg);
  sample.body_pose_seed = rng.next_u64();
  sample.fov_deg = fov_deg_from_focal_mm(sample.focal_mm,
                                         config.sensor_height_mm);

  sample.intrinsics.f = sample.focal_mm / config.sensor_height_mm *
                        config.image_height;
  sample.intrinsics.width = config.image_width;
  sample.intrinsics.height = config.image_height;
  sample.intrinsics.cx = config.image_width / 2.0;
  sample.intrinsics.cy = config.image_height / 2.0;

  const double elev = sample.elevation_deg * kDegToRad;
  const double azim = sample.azimuth_deg * kDegToRad;
  sample.camera_position = sample.distance *
                           Vec3{std::cos(elev) * std::sin(azim),
                                std::sin(elev),
                                std::cos(elev) * std::cos(azim)};

  // Look-at basis, camera x right / y down / z forward.
  const Vec3 forward = (-sample.camera_position).normalized();
  Vec3 down{0.0, -1.0, 0.0};
  Vec3 right = down.cross(forward);
  if (right.norm() < 1e-9) right = Vec3{1.0, 0.0, 0.0};
  right.normalize();
  down = forward.cross(right);
  sample.rotation.row(0) = right;
  sample.rotation.row(1) = down;
  sample.rotation.row(2) = forward;
  return sample;
}

Pose sample_pose(int num_joints, uint64_t pose_seed) {
  Rng rng(pose_seed);
  Pose pose = Pose::identity(num_joints);
  pose.rotations[0] = Eigen::Quaterniond(
      Eigen::AngleAxisd(rng.uniform(0.0, 2.0 * std::numbers::pi),
                        Vec3::UnitY()));
  // hips, knees, shoulders, elbows
  for (int joint : {1, 2, 4, 5, 16, 17, 18, 19}) {
    if (joint >= num_joints) continue;
    const Vec3 axis = Vec3{rng.uniform(-1, 1), rng.uniform(-1, 1),
                           rng.uniform(-1, 1)}
                          .normalized();
    const double angle = rng.uniform(-std::numbers::pi / 6.0,
                                     std::numbers::pi / 6.0);
    pose.rotations[joint] = Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis));
  }
  return pose;
}

DollyZoomResult dolly_zoom_error(std::span<const Vec3> joints3d, double tz,
                                 double image_height) {
  if (tz <= 0.0) throw InvalidValue("dolly_zoom_error: tz must be > 0");
  if (joints3d.size() < 3) {
    throw DegenerateBody("dolly_zoom_error: need at least 3 joints");
  }

  // Perspective focal chosen so the body's radial extent spans ~90% of the
  // half-image at this distance (the zoom half of the dolly zoom).
  double radius = 0.0;
  for (const Vec3& j : joints3d) {
    radius = std::max(radius, std::hypot(j.x(), j.y()));
  }
  if (radius <= 0.0) {
    throw DegenerateBody("dolly_zoom_error: joints are radially degenerate");
  }
  const double half_h = image_height / 2.0;
  const CameraIntrinsics cam{0.9 * half_h * tz / radius, half_h, half_h,
                             image_height, image_height};
  const Translation t{0.0, 0.0, tz};

  std::vector<Vec2> persp;
  persp.reserve(joints3d.size());
  double tau = 0.0;
  for (const Vec3& j : joints3d) {
    persp.push_back(perspective_project(j, t, cam));
    tau = std::max(tau, tz / (j.z() + tz));
  }

  // Least-squares (alpha, bx, by) with u = alpha*x + bx + cx: centered
  // normal equations, alpha shared by both axes.
  const size_t n = joints3d.size();
  double mx = 0, my = 0, mu = 0, mv = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += joints3d[i].x();
    my += joints3d[i].y();
    mu += persp[i].x() - cam.cx;
    mv += persp[i].y() - cam.cy;
  }
  mx /= n, my /= n, mu /= n, mv /= n;
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double xc = joints3d[i].x() - mx;
    const double yc = joints3d[i].y() - my;
    num += xc * (persp[i].x() - cam.cx - mu) +
           yc * (persp[i].y() - cam.cy - mv);
    den += xc * xc + yc * yc;
  }
  if (den <= 1e-18) {
    throw DegenerateBody("dolly_zoom_error: joints are spatially degenerate");
  }
  const double alpha = num / den;
  if (alpha <= 0.0) {
    throw DegenerateBody("dolly_zoom_error: negative fitted scale");
  }

  DollyZoomResult result;
  result.weak.s = 2.0 * alpha / image_height;
  result.weak.tx = (mu - alpha * mx) / alpha;
  result.weak.ty = (mv - alpha * my) / alpha;
  result.focal_px = cam.f;
  result.tau = tau;

  double error = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const Vec2 weak = weak_project(joints3d[i], result.weak, cam);
    error += (weak - persp[i]).norm();
  }
  result.error_px = error / static_cast<double>(n);
  return result;
}

namespace {

struct GeneratedScene {
  SceneSample sample;
  Json meta;
  SceneRecord record;
  RasterBuffers buffers;
};

GeneratedScene generate_one(const CameraSampleConfig& config,
                            const DefaultBody& db, int index) {
  Rng rng(Rng::derive(config.seed, static_cast<uint64_t>(index)));
  for (int attempt = 0; attempt < 100; ++attempt) {
    const SceneSample sample = sample_scene(config, rng);
    const Pose pose = sample_pose(kNumJoints, sample.body_pose_seed);
    const auto posed = pose_body(db.body, pose);

    std::vector<Vec3> cam_vertices(posed.size());
    double min_depth = std::numeric_limits<double>::infinity();
    for (size_t v = 0; v < posed.size(); ++v) {
      cam_vertices[v] = sample.rotation * posed[v];
      min_depth = std::min(min_depth, cam_vertices[v].z() + sample.distance);
    }
    if (min_depth <= 0.05) continue;  // camera inside the body; resample

    const Translation t{0.0, 0.0, sample.distance};
    RasterBuffers buffers = rasterize(db.body, cam_vertices, t,
                                      sample.intrinsics);
    if (buffers.empty) continue;

    const auto joints_w = regress_joints(db.regressor, posed);
    std::vector<Vec3> joints_cam(joints_w.size());
    for (size_t j = 0; j < joints_w.size(); ++j) {
      joints_cam[j] = sample.rotation * joints_w[j];
    }
    const auto joints2d =
        perspective_project(joints_cam, t, sample.intrinsics);

    GeneratedScene out;
    out.sample = sample;
    out.buffers = std::move(buffers);

    const double tau = max_distortion_scale(out.buffers);
    const int protocol = assign_protocol(
        tau, std::span<const double>(kSynthTauThresholds));

    Json joints3d_json = Json::array();
    for (const Vec3& j : joints_cam) {
      joints3d_json.push_back({j.x(), j.y(), j.z()});
    }
    Json joints2d_json = Json::array();
    for (const Vec2& j : joints2d) joints2d_json.push_back({j.x(), j.y()});
    Json rotation_json = Json::array();
    for (int r = 0; r < 3; ++r) {
      rotation_json.push_back({sample.rotation(r, 0), sample.rotation(r, 1),
                               sample.rotation(r, 2)});
    }

    out.meta = Json{{"id", index},
                    {"tau", tau},
                    {"protocol", protocol},
                    {"translation", Translation{0.0, 0.0, sample.distance}},
                    {"rotation", rotation_json},
                    {"camera_position",
                     {sample.camera_position.x(), sample.camera_position.y(),
                      sample.camera_position.z()}},
                    {"distance", sample.distance},
                    {"focal_mm", sample.focal_mm},
                    {"fov_deg", sample.fov_deg},
                    {"elevation_deg", sample.elevation_deg},
                    {"azimuth_deg", sample.azimuth_deg},
                    {"body_pose_seed", sample.body_pose_seed},
                    {"joints3d", joints3d_json},
                    {"joints2d", joints2d_json}};
    out.record = SceneRecord{index, "", tau, protocol, sample.distance,
                             sample.intrinsics.f, sample.fov_deg};
    return out;
  }
  throw DegenerateConfiguration(
      "generate_dataset: no valid camera after 100 attempts for scene " +
      std::to_string(index));
}

std::string scene_dir_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d", index);
  return std::string("scenes/") + buf;
}

}  // namespace

std::vector<SceneRecord> generate_dataset(const CameraSampleConfig& config,
                                          int n, const std::string& out_dir,
                                          int threads) {
  config.validate();
  if (n < 0) throw InvalidValue("generate_dataset: n must be >= 0");
  std::filesystem::create_directories(out_dir);

  const DefaultBody db = build_default_body();
  std::vector<GeneratedScene> scenes(n);

  const auto worker = [&](int begin, int step) {
    for (int i = begin; i < n; i += step) {
      scenes[i] = generate_one(config, db, i);
    }
  };
  const int pool_size = std::max(1, std::min(threads, n));
  if (pool_size <= 1) {
    if (n > 0) worker(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < pool_size; ++t) pool.emplace_back(worker, t, pool_size);
    for (auto& th : pool) th.join();
  }

  std::vector<SceneRecord> records;
  Json index_entries = Json::array();
  for (int i = 0; i < n; ++i) {
    const std::string rel = scene_dir_name(i);
    const std::string dir = out_dir + "/" + rel;
    save_raster_buffers(dir, scenes[i].buffers, scenes[i].sample.intrinsics,
                        scenes[i].meta);
    scenes[i].record.dir = rel;
    records.push_back(scenes[i].record);
    index_entries.push_back({{"id", i},
                             {"dir", rel},
                             {"tau", scenes[i].record.tau},
                             {"protocol", scenes[i].record.protocol},
                             {"distance", scenes[i].record.distance},
                             {"focal_px", scenes[i].record.focal_px},
                             {"fov_deg", scenes[i].record.fov_deg}});
  }

  Json index;
  index["config"] = config;
  index["count"] = n;
  index["scenes"] = std::move(index_entries);
  save_json_file(out_dir + "/index.json", index);
  return records;
}

std::vector<SceneRecord> load_dataset_index(const std::string& out_dir) {
  const Json index = load_json_file(out_dir + "/index.json");
  std::vector<SceneRecord> records;
  try {
    for (const Json& e : index.at("scenes")) {
      records.push_back({e.at("id").get<int>(),
                         e.at("dir").get<std::string>(),
                         e.at("tau").get<double>(), e.at("protocol").get<int>(),
                         e.at("distance").get<double>(),
                         e.at("focal_px").get<double>(),
                         e.at("fov_deg").get<double>()});
    }
  } catch (const Json::exception& e) {
    throw IoError(out_dir + "/index.json: " + e.what());
  }
  return records;
}

Scene load_scene(const std::string& scene_dir) {
  LoadedRaster raster = load_raster_buffers(scene_dir);
  Scene scene;
  scene.meta = load_json_file(scene_dir + "/meta.json");
  scene.buffers = std::move(raster.buffers);
  scene.intrinsics = raster.intrinsics;
  try {
    scene.translation = scene.meta.at("translation").get<Translation>();
    scene.tau = scene.meta.at("tau").get<double>();
    scene.protocol = scene.meta.at("protocol").get<int>();
    for (const Json& j : scene.meta.at("joints3d")) {
      scene.joints3d.push_back({j.at(0).get<double>(), j.at(1).get<double>(),
                                j.at(2).get<double>()});
    }
    for (const Json& j : scene.meta.at("joints2d")) {
      scene.joints2d.push_back({j.at(0).get<double>(), j.at(1).get<double>()});
    }
  } catch (const Json::exception& e) {
    throw IoError(scene_dir + "/meta.json: " + e.what());
  }
  return scene;
}

}  // namespace pd
