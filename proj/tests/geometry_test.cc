#include "curvpose/geometry.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "curvpose/errors.h"

namespace curvpose {
namespace {

Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return rotation_from_axis_angle(Vec3(n(rng), n(rng), n(rng)));
}

Pose random_pose(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return Pose(random_rotation(rng), Vec3(n(rng), n(rng), n(rng)));
}

Camera test_camera() {
  return look_at(Vec3(0.3, -0.7, 0.5), Vec3(0.0, 0.0, 0.0), Vec3::UnitZ(), 450.0, 440.0, 160.0, 128.0, 320, 256);
}

TEST(Pose, ComposeWithIdentity) {
  std::mt19937_64 rng(1);
  const Pose p = random_pose(rng);
  const Pose c = compose(Pose::identity(), p);
  EXPECT_TRUE(c.rotation().isApprox(p.rotation(), 1e-15));
  EXPECT_TRUE(c.translation().isApprox(p.translation(), 1e-15));
}

TEST(Pose, ComposeWithInverseIsIdentity) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 100; ++k) {
    const Pose p = random_pose(rng);
    const Pose c = compose(p, p.inverse());
    EXPECT_LE((c.rotation() - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE(c.translation().cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Pose, ComposeMatchesMatrixProduct) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 50; ++k) {
    const Pose a = random_pose(rng);
    const Pose b = random_pose(rng);
    Eigen::Matrix4d ma = Eigen::Matrix4d::Identity(), mb = Eigen::Matrix4d::Identity();
    ma.topLeftCorner<3, 3>() = a.rotation();
    ma.topRightCorner<3, 1>() = a.translation();
    mb.topLeftCorner<3, 3>() = b.rotation();
    mb.topRightCorner<3, 1>() = b.translation();
    Eigen::Matrix4d expected;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        double s = 0.0;
        for (int m = 0; m < 4; ++m) s += ma(i, m) * mb(m, j);
        expected(i, j) = s;
      }
    }
    const Pose c = compose(a, b);
    EXPECT_LE((c.rotation() - expected.topLeftCorner<3, 3>()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((c.translation() - expected.topRightCorner<3, 1>()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE(orthonormality_error(c.rotation()), 1e-9);
  }
}

TEST(Pose, RejectsNonRotation) {
  Mat3 m = Mat3::Identity();
  m(0, 0) = 1.1;
  EXPECT_THROW(Pose(m, Vec3::Zero()), Error);
  EXPECT_THROW(Pose(-Mat3::Identity(), Vec3::Zero()), Error);
}

TEST(Pose, ReorthonormalizesSmallDrift) {
  Mat3 m = Mat3::Identity();
  m(0, 1) = 1e-8;
  const Pose p(m, Vec3::Zero());
  EXPECT_LE(orthonormality_error(p.rotation()), 1e-12);
}

TEST(Rotation, AxisAngleRoundTrip) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    Vec3 w(u(rng), u(rng), u(rng));
    w = w.normalized() * (M_PI * std::abs(u(rng)));
    const Vec3 back = axis_angle_from_rotation(rotation_from_axis_angle(w));
    EXPECT_LE(back.norm(), M_PI + 1e-12);
    EXPECT_LE((rotation_from_axis_angle(back) - rotation_from_axis_angle(w)).norm(), 1e-12);
  }
  EXPECT_EQ(axis_angle_from_rotation(Mat3::Identity()), Vec3::Zero());
}

TEST(Project, PrincipalPoint) {
  Camera cam;
  cam.fx = 500.0;
  cam.fy = 500.0;
  cam.cx = 160.0;
  cam.cy = 128.0;
  cam.width = 320;
  cam.height = 256;
  const Vec2 p = project(cam, Vec3(0.0, 0.0, 1.0));
  EXPECT_EQ(p, Vec2(160.0, 128.0));
  const Vec2 q = project(cam, Vec3(0.1, 0.0, 1.0));
  EXPECT_DOUBLE_EQ(q.x(), 210.0);
  EXPECT_DOUBLE_EQ(q.y(), 128.0);
}

TEST(Project, MatchesHomogeneousMatrix) {
  const Camera cam = test_camera();
  Eigen::Matrix<double, 3, 4> rt;
  rt.leftCols<3>() = cam.world_to_cam.rotation();
  rt.col(3) = cam.world_to_cam.translation();
  Mat3 k = Mat3::Zero();
  k << cam.fx, 0.0, cam.cx, 0.0, cam.fy, cam.cy, 0.0, 0.0, 1.0;
  const Eigen::Matrix<double, 3, 4> p = k * rt;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  for (int n = 0; n < 100; ++n) {
    const Vec3 x(u(rng), u(rng), u(rng));
    const Vec3 h = p * x.homogeneous();
    EXPECT_LE((project(cam, x) - h.hnormalized()).norm(), 1e-9);
  }
}

TEST(Project, BehindCameraThrows) {
  Camera cam;
  try {
    project(cam, Vec3(0.0, 0.0, -1.0));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBehindCamera);
  }
  EXPECT_THROW(project(cam, Vec3(1.0, 0.0, 0.0)), Error);
}

TEST(PixelRay, PrincipalPointIsOpticalAxis) {
  const Camera cam = test_camera();
  const Ray r = pixel_ray(cam, Vec2(cam.cx, cam.cy));
  const Vec3 axis = cam.world_to_cam.rotation().transpose() * Vec3::UnitZ();
  EXPECT_LE((r.direction - axis).norm(), 1e-12);
  EXPECT_LE((r.origin - cam.center()).norm(), 1e-12);
  EXPECT_NEAR(r.direction.norm(), 1.0, 1e-12);
}

TEST(PixelRay, RoundTrip) {
  const Camera cam = test_camera();
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  for (int n = 0; n < 100; ++n) {
    const Vec3 x(u(rng), u(rng), u(rng));
    const Vec2 px = project(cam, x);
    const Ray r = pixel_ray(cam, px);
    const double dist = (x - r.origin).cross(r.direction).norm();
    EXPECT_LE(dist, 1e-9);
    for (double t : {0.1, 1.0, 5.0}) EXPECT_LE((project(cam, r.at(t)) - px).norm(), 1e-6);
  }
}

TEST(PixelRay, TwoCamerasSamePoint) {
  const Camera a = test_camera();
  const Camera b = look_at(Vec3(-0.6, 0.4, 0.6), Vec3::Zero(), Vec3::UnitZ(), 450, 450, 160, 128, 320, 256);
  const Vec3 x(0.05, -0.02, 0.03);
  for (const Camera* c : {&a, &b}) {
    const Ray r = pixel_ray(*c, project(*c, x));
    EXPECT_LE((x - r.origin).cross(r.direction).norm(), 1e-9);
  }
}

TEST(RayPair, Intersecting) {
  const Vec3 p(0.1, 0.2, 0.3);
  const Ray a = make_ray(Vec3(1.0, 0.0, 0.0), p - Vec3(1.0, 0.0, 0.0));
  const Ray b = make_ray(Vec3(0.0, 2.0, 1.0), p - Vec3(0.0, 2.0, 1.0));
  const RayPairMidpoint m = ray_pair_midpoint(a, b);
  EXPECT_LE((m.midpoint - p).norm(), 1e-12);
  EXPECT_LE(m.gap, 1e-12);
}

TEST(RayPair, ParallelThrows) {
  const Ray a = make_ray(Vec3::Zero(), Vec3::UnitX());
  const Ray b = make_ray(Vec3(0.0, 1.0, 0.0), Vec3::UnitX());
  try {
    ray_pair_midpoint(a, b);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParallel);
  }
}

// Grid search over (s, t) >= 0 followed by coordinate refinement.
double brute_force_gap(const Ray& a, const Ray& b, Vec3* mid) {
  auto dist = [&](double s, double t) { return (a.at(s) - b.at(t)).norm(); };
  double bs = 0.0, bt = 0.0, best = dist(0.0, 0.0);
  for (int i = 0; i <= 400; ++i) {
    for (int j = 0; j <= 400; ++j) {
      const double s = 0.02 * i, t = 0.02 * j;
      const double d = dist(s, t);
      if (d < best) best = d, bs = s, bt = t;
    }
  }
  for (double step = 0.02; step > 1e-13; step *= 0.5) {
    bool moved = true;
    while (moved) {
      moved = false;
      for (auto [ds, dt] : {std::pair{step, 0.0}, {-step, 0.0}, {0.0, step}, {0.0, -step}}) {
        const double s = std::max(0.0, bs + ds), t = std::max(0.0, bt + dt);
        const double d = dist(s, t);
        if (d < best) best = d, bs = s, bt = t, moved = true;
      }
    }
  }
  *mid = 0.5 * (a.at(bs) + b.at(bt));
  return best;
}

TEST(RayPair, MatchesBruteForceAndIsSymmetric) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int n = 0; n < 30; ++n) {
    const Ray a = make_ray(Vec3(u(rng), u(rng), u(rng)), Vec3(u(rng), u(rng), u(rng)));
    const Ray b = make_ray(Vec3(u(rng), u(rng), u(rng)), Vec3(u(rng), u(rng), u(rng)));
    const RayPairMidpoint m = ray_pair_midpoint(a, b);
    Vec3 mid;
    const double gap = brute_force_gap(a, b, &mid);
    EXPECT_NEAR(m.gap, gap, 1e-6);
    EXPECT_LE((m.midpoint - mid).norm(), 1e-5);
    const RayPairMidpoint swapped = ray_pair_midpoint(b, a);
    EXPECT_LE((swapped.midpoint - m.midpoint).norm(), 1e-12);
    EXPECT_LE(std::abs(swapped.gap - m.gap), 1e-12);
  }
}

TEST(Camera, ValidateRejectsBadIntrinsics) {
  Camera c;
  c.fx = 0.0;
  EXPECT_THROW(c.validate(), Error);
  Camera d;
  d.width = 0;
  EXPECT_THROW(d.validate(), Error);
}

TEST(Camera, LookAtCentersTarget) {
  const Camera cam = test_camera();
  const Vec2 p = project(cam, Vec3::Zero());
  EXPECT_NEAR(p.x(), cam.cx, 1e-9);
  EXPECT_NEAR(p.y(), cam.cy, 1e-9);
  // Image y points away from "up": a point above the target lands at smaller y.
  EXPECT_LT(project(cam, Vec3(0.0, 0.0, 0.05)).y(), cam.cy);
}

}  // namespace
}  // namespace curvpose
