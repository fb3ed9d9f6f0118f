#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "pd/body.hpp"
#include "pd/synth.hpp"

using namespace pd;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<Vec3> default_joints() {
  const DefaultBody db = build_default_body();
  return regress_joints(db.regressor, db.body.vertices);
}

}  // namespace

TEST_CASE("fov from focal length") {
  CHECK(fov_deg_from_focal_mm(7.0, 24.0) ==
        doctest::Approx(119.487).epsilon(1e-3));
  CHECK(fov_deg_from_focal_mm(102.0, 24.0) ==
        doctest::Approx(13.43).epsilon(1e-2));
  // 7..102 mm at a 24 mm sensor stays inside the 10..140 degree band.
  CHECK_NOTHROW(CameraSampleConfig{}.validate());
}

TEST_CASE("sample_scene") {
  CameraSampleConfig config;
  config.seed = 99;

  SUBCASE("draws respect the configured ranges") {
    Rng rng(config.seed);
    for (int i = 0; i < 2000; ++i) {
      const SceneSample s = sample_scene(config, rng);
      CHECK(s.fov_deg >= config.fov_min_deg);
      CHECK(s.fov_deg <= config.fov_max_deg);
      CHECK(s.distance >= config.distance_min);
      CHECK(s.distance <= config.distance_max);
      CHECK(s.camera_position.norm() ==
            doctest::Approx(s.distance).epsilon(1e-12));
      CHECK_NOTHROW(s.validate());
    }
  }

  SUBCASE("fixed seed reproduces the sequence") {
    Rng a(7), b(7);
    for (int i = 0; i < 50; ++i) {
      const SceneSample sa = sample_scene(config, a);
      const SceneSample sb = sample_scene(config, b);
      CHECK(sa.focal_mm == sb.focal_mm);
      CHECK(sa.distance == sb.distance);
      CHECK(sa.camera_position == sb.camera_position);
      CHECK(sa.body_pose_seed == sb.body_pose_seed);
    }
  }

  SUBCASE("collapsed elevation keeps cameras on the equator") {
    config.elevation_min_deg = 0.0;
    config.elevation_max_deg = 0.0;
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
      const SceneSample s = sample_scene(config, rng);
      CHECK(std::abs(s.camera_position.y()) < 1e-9);
    }
  }

  SUBCASE("invalid configs rejected") {
    CameraSampleConfig bad;
    bad.distance_min = -1.0;
    CHECK_THROWS_AS(bad.validate(), InvalidValue);
    bad = {};
    bad.focal_mm_min = 1.0;  // FoV would exceed 140 degrees
    CHECK_THROWS_AS(bad.validate(), InvalidValue);
  }
}

TEST_CASE("dolly_zoom_error") {
  const auto joints = default_joints();
  const std::vector<double> sweep{0.5, 0.75, 1.0, 2.0, 4.0, 8.0, 12.0, 16.0,
                                  20.0};

  SUBCASE("error and tau strictly decrease with distance") {
    double prev_error = std::numeric_limits<double>::infinity();
    double prev_tau = std::numeric_limits<double>::infinity();
    for (double tz : sweep) {
      const DollyZoomResult r = dolly_zoom_error(joints, tz, 224.0);
      CHECK(r.error_px < prev_error);
      CHECK(r.tau < prev_tau);
      prev_error = r.error_px;
      prev_tau = r.tau;
    }
  }

  SUBCASE("far distances approach the weak model") {
    const double e8 = dolly_zoom_error(joints, 8.0, 224.0).error_px;
    const double e20 = dolly_zoom_error(joints, 20.0, 224.0).error_px;
    CHECK(e8 < 1.0);
    CHECK(e20 < e8);
  }

  SUBCASE("near/far error ratio") {
    const double e05 = dolly_zoom_error(joints, 0.5, 224.0).error_px;
    const double e4 = dolly_zoom_error(joints, 4.0, 224.0).error_px;
    CHECK(e05 / e4 > 5.0);
  }

  SUBCASE("rejects bad input") {
    CHECK_THROWS_AS(dolly_zoom_error(joints, 0.0, 224.0), InvalidValue);
    const std::vector<Vec3> line{{0, 0, 0}, {0, 0, 0.1}, {0, 0, 0.2}};
    CHECK_THROWS_AS(dolly_zoom_error(line, 2.0, 224.0), DegenerateBody);
  }
}

TEST_CASE("generate_dataset") {
  CameraSampleConfig config;
  config.seed = 11;
  config.image_width = 128;
  config.image_height = 128;

  SUBCASE("n = 0 writes an empty manifest") {
    const std::string dir = "test_synth_empty";
    const auto records = generate_dataset(config, 0, dir);
    CHECK(records.empty());
    const auto loaded = load_dataset_index(dir);
    CHECK(loaded.empty());
    std::filesystem::remove_all(dir);
  }

  SUBCASE("stored tau matches the stored buffers; reruns are byte-identical") {
    const std::string dir_a = "test_synth_a";
    const std::string dir_b = "test_synth_b";
    const auto rec_a = generate_dataset(config, 4, dir_a, 1);
    const auto rec_b = generate_dataset(config, 4, dir_b, 2);
    REQUIRE(rec_a.size() == 4);

    for (const SceneRecord& r : rec_a) {
      const Scene scene = load_scene(dir_a + "/" + r.dir);
      const double recomputed = max_distortion_scale(scene.buffers);
      CHECK(std::abs(recomputed - r.tau) <= 1e-6 * r.tau);
      CHECK(scene.joints3d.size() == kNumJoints);
      CHECK(scene.joints2d.size() == kNumJoints);
      CHECK(scene.translation.Tz == doctest::Approx(r.distance));
    }

    // Same bytes regardless of thread count.
    CHECK(slurp(dir_a + "/index.json") == slurp(dir_b + "/index.json"));
    for (const char* file :
         {"scenes/0002/meta.json", "scenes/0002/depth.pfm",
          "scenes/0002/iuv.png", "scenes/0002/distortion.pfm"}) {
      CHECK(slurp(dir_a + "/" + file) == slurp(dir_b + "/" + file));
    }
    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);
  }

  SUBCASE("close distances produce clearly distorted samples") {
    config.distance_min = 0.5;
    config.distance_max = 1.0;
    const std::string dir = "test_synth_close";
    const auto records = generate_dataset(config, 20, dir, 2);
    for (const SceneRecord& r : records) CHECK(r.tau > 1.1);
    std::filesystem::remove_all(dir);
  }
}
