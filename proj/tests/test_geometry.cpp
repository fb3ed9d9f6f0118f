#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pd/geometry.hpp"
#include "pd/rng.hpp"
#include "pd/serialize.hpp"

using namespace pd;

namespace {

CameraIntrinsics make_cam(double f, double size = 224.0) {
  return {f, size / 2.0, size / 2.0, size, size};
}

}  // namespace

TEST_CASE("perspective_project basics") {
  const CameraIntrinsics k = make_cam(1000.0);

  SUBCASE("optical-axis point maps to principal point") {
    const Vec2 p = perspective_project(Vec3{0, 0, 0}, {0, 0, 2}, k);
    CHECK(p.x() == doctest::Approx(112.0).epsilon(1e-12));
    CHECK(p.y() == doctest::Approx(112.0).epsilon(1e-12));
  }

  SUBCASE("off-axis point") {
    const CameraIntrinsics k500 = make_cam(500.0);
    const Vec2 p = perspective_project(Vec3{0.2, 0, 0}, {0, 0, 1}, k500);
    CHECK(p.x() == doctest::Approx(212.0).epsilon(1e-12));
    CHECK(p.y() == doctest::Approx(112.0).epsilon(1e-12));
  }

  SUBCASE("degenerate depth throws") {
    CHECK_THROWS_AS(
        perspective_project(Vec3{0, 0, -1 + 1e-7}, {0, 0, 1}, k),
        PointBehindCamera);
  }

  SUBCASE("batch matches scalar") {
    const std::vector<Vec3> pts{{0.1, -0.2, 0.3}, {0, 0, 0}};
    const auto out = perspective_project(pts, {0.5, -0.5, 3}, k);
    REQUIRE(out.size() == 2);
    CHECK(out[0] == perspective_project(pts[0], {0.5, -0.5, 3}, k));
  }
}

TEST_CASE("weak_project") {
  const CameraIntrinsics k = make_cam(1000.0);

  SUBCASE("z=0 plane identity with s = 2f/(h*Tz)") {
    const double tz = 3.0;
    const double s = 2.0 * k.f / (k.height * tz);
    const WeakPerspective w{s, 0.07, -0.12};
    Rng rng(7);
    std::vector<Vec3> pts;
    for (int i = 0; i < 50; ++i) {
      pts.push_back({rng.uniform(-0.5, 0.5), rng.uniform(-0.9, 0.9), 0.0});
    }
    const auto weak = weak_project(pts, w, k);
    const auto persp = perspective_project(pts, {w.tx, w.ty, tz}, k);
    for (size_t i = 0; i < pts.size(); ++i) {
      CHECK((weak[i] - persp[i]).norm() <=
            1e-9 * std::max(1.0, persp[i].norm()));
    }
  }

  SUBCASE("centered point ignores z") {
    const Vec2 p = weak_project(Vec3{0, 0, 123.0}, {0.8, 0, 0}, k);
    CHECK(p.x() == doctest::Approx(k.cx));
    CHECK(p.y() == doctest::Approx(k.cy));
  }

  SUBCASE("z discarded") {
    const WeakPerspective w{1.0, 0, 0};
    const Vec2 a = weak_project(Vec3{0.1, 0, 0.5}, w, k);
    const Vec2 b = weak_project(Vec3{0.1, 0, 0.0}, w, k);
    CHECK(a.x() == b.x());
    CHECK(a.y() == b.y());
  }

  SUBCASE("non-positive scale rejected") {
    CHECK_THROWS_AS(weak_project(Vec3{0, 0, 0}, {0.0, 0, 0}, k),
                    InvalidValue);
  }
}

TEST_CASE("focal/translation conversions") {
  SUBCASE("closed forms") {
    CHECK(focal_from_weak(1.0, 224.0, 5.0) == doctest::Approx(560.0));
    CHECK(tz_from_focal(560.0, 224.0, 1.0) == doctest::Approx(5.0));
    // s=1, h=224, f=5000  =>  Tz = 2*5000/224.
    CHECK(tz_from_focal(5000.0, 224.0, 1.0) ==
          doctest::Approx(44.642857142857146).epsilon(1e-12));
  }

  SUBCASE("roundtrips exact to 1e-12 relative") {
    Rng rng(11);
    for (int i = 0; i < 1000; ++i) {
      const double s = rng.uniform(0.05, 20.0);
      const double h = rng.uniform(16.0, 4096.0);
      const double tz = rng.uniform(0.01, 10.0);
      const double f = focal_from_weak(s, h, tz);
      CHECK(std::abs(tz_from_focal(f, h, s) - tz) <= 1e-12 * tz);
      const double f0 = rng.uniform(10.0, 10000.0);
      const double tz0 = tz_from_focal(f0, h, s);
      CHECK(std::abs(focal_from_weak(s, h, tz0) - f0) <= 1e-12 * f0);
    }
  }

  SUBCASE("doubling s halves Tz") {
    const double tz1 = tz_from_focal(800.0, 224.0, 1.3);
    const double tz2 = tz_from_focal(800.0, 224.0, 2.6);
    CHECK(tz2 == doctest::Approx(tz1 / 2.0).epsilon(1e-12));
  }
}

TEST_CASE("crop_to_full_translation") {
  SUBCASE("identity crop") {
    const CropBox box{256, 256, 512, 512, 512, 512};
    const auto [tx, ty] = crop_to_full_translation({0.9, 0.25, -0.5}, box);
    CHECK(tx == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(ty == doctest::Approx(-0.5).epsilon(1e-12));
  }

  SUBCASE("offset symmetry") {
    const double delta = 37.0;
    const CropBox right{256 + delta, 256, 256, 256, 512, 512};
    const CropBox left{256 - delta, 256, 256, 256, 512, 512};
    const WeakPerspective w{0.7, 0, 0};
    const auto [txr, tyr] = crop_to_full_translation(w, right);
    const auto [txl, tyl] = crop_to_full_translation(w, left);
    CHECK(txr == doctest::Approx(2.0 * delta / (256 * 0.7)).epsilon(1e-12));
    CHECK(txl == doctest::Approx(-txr).epsilon(1e-12));
    CHECK(tyr == doctest::Approx(0.0));
    CHECK(tyl == doctest::Approx(0.0));
  }

  SUBCASE("hand-evaluated case") {
    const CropBox box{300, 256, 256, 256, 512, 512};
    const auto [tx, ty] = crop_to_full_translation({0.8, 0.1, 0.0}, box);
    CHECK(tx == doctest::Approx(0.5296875).epsilon(1e-12));
  }
}

TEST_CASE("ndc_screen_convert") {
  const CameraIntrinsics k = make_cam(1000.0);

  CHECK(ndc_screen_convert(Vec2{k.cx, k.cy}, k, NdcDirection::kScreenToNdc)
            .isZero(1e-15));
  const Vec2 unit = ndc_screen_convert(Vec2{k.cx + k.height / 2, k.cy}, k,
                                       NdcDirection::kScreenToNdc);
  CHECK(unit.x() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(unit.y() == doctest::Approx(0.0));

  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const Vec2 p{rng.uniform(-500, 500), rng.uniform(-500, 500)};
    const Vec2 ndc = ndc_screen_convert(p, k, NdcDirection::kScreenToNdc);
    const Vec2 back = ndc_screen_convert(ndc, k, NdcDirection::kNdcToScreen);
    CHECK((back - p).norm() <= 1e-12 * std::max(1.0, p.norm()));
  }
}

TEST_CASE("projection properties") {
  const CameraIntrinsics k = make_cam(700.0);

  SUBCASE("homogeneity: scaling all camera-space coordinates together") {
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
      const Vec3 p{rng.uniform(-1, 1), rng.uniform(-1, 1),
                   rng.uniform(-0.4, 0.4)};
      const Translation t{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
                          rng.uniform(0.6, 9.0)};
      const double c = rng.uniform(0.5, 1.1);
      const Vec3 ps = p * c;
      const Translation ts{t.Tx * c, t.Ty * c, t.Tz * c};
      const Vec2 a = perspective_project(p, t, k);
      const Vec2 b = perspective_project(ps, ts, k);
      CHECK((a - b).norm() <= 1e-9 * std::max(1.0, a.norm()));
    }
  }

  SUBCASE("dolly-zoom: scaling f with all camera-space depths") {
    Rng rng(6);
    for (int i = 0; i < 200; ++i) {
      const Vec3 p{rng.uniform(-1, 1), rng.uniform(-1, 1),
                   rng.uniform(-0.4, 0.4)};
      const Translation t{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
                          rng.uniform(0.6, 4.9)};
      const double c = rng.uniform(0.5, 2.0);
      CameraIntrinsics ks = k;
      ks.f = k.f * c;
      // z+Tz scales by c when both z and Tz do.
      const Vec3 ps{p.x(), p.y(), p.z() * c};
      const Translation ts{t.Tx, t.Ty, t.Tz * c};
      const Vec2 a = perspective_project(p, t, k);
      const Vec2 b = perspective_project(ps, ts, ks);
      CHECK((a - b).norm() <= 1e-9 * std::max(1.0, a.norm()));
    }
  }

  SUBCASE("projected u strictly decreasing in Tz for x > 0") {
    const Vec3 p{0.3, -0.1, 0.05};
    double prev = std::numeric_limits<double>::infinity();
    for (double tz = 0.5; tz <= 10.0; tz += 0.25) {
      const double u = perspective_project(p, {0, 0, tz}, k).x();
      CHECK(u < prev);
      prev = u;
    }
  }
}

TEST_CASE("type invariants") {
  CHECK_THROWS_AS(Translation({0, 0, 0}).validate(), InvalidValue);
  CHECK_THROWS_AS(Translation({0, 0, 10.5}).validate(), InvalidValue);
  CHECK_NOTHROW(Translation({0, 0, 10.0}).validate());
  CHECK_THROWS_AS(CameraIntrinsics({-1, 0, 0, 224, 224}).validate(),
                  InvalidValue);
  CHECK_THROWS_AS(CropBox({0, 0, 100, 80, 512, 512}).validate(),
                  InvalidValue);
  CHECK_THROWS_AS(WeakPerspective({std::nan(""), 0, 0}).validate(),
                  InvalidValue);
}

TEST_CASE("camera JSON schema roundtrip") {
  const CameraIntrinsics k{350.5, 256, 240, 512, 480};
  const Json j = k;
  CHECK(j.at("f") == 350.5);
  const auto back = j.get<CameraIntrinsics>();
  CHECK(back.height == 480);

  const Json jw = WeakPerspective{1.5, 0.1, -0.2};
  CHECK(jw.at("s") == 1.5);
  const Json jt = Translation{0.0, 0.1, 4.0};
  CHECK(jt.at("Tz") == 4.0);
  CHECK_THROWS_AS((Json{{"s", 1.0}}.get<WeakPerspective>()), IoError);
}
