#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace curvpose {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Rigid transform x -> R x + t. Object poses map object frame to world frame;
// camera extrinsics map world frame to camera frame.
class Pose {
 public:
  Pose() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}
  // The rotation must be orthonormal with det +1 (checked to 1e-6, then
  // re-orthonormalized if it drifts by more than 1e-9).
  Pose(const Mat3& rotation, const Vec3& translation);

  static Pose identity() { return Pose(); }
  static Pose from_axis_angle(const Vec3& axis_angle, const Vec3& translation);

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }
  Vec3 axis_angle() const;

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  Pose inverse() const;

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

// Applies b first, then a.
Pose compose(const Pose& a, const Pose& b);

Mat3 rotation_from_axis_angle(const Vec3& axis_angle);
// Returned angle (the norm) lies in [0, pi].
Vec3 axis_angle_from_rotation(const Mat3& rotation);
// Nearest rotation in the Frobenius sense.
Mat3 nearest_rotation(const Mat3& m);
double orthonormality_error(const Mat3& m);

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length

  Vec3 at(double t) const { return origin + t * direction; }
};

Ray make_ray(const Vec3& origin, const Vec3& direction);

struct Camera {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;
  Pose world_to_cam;

  // Throws kInvalidArgument when intrinsics are not usable.
  void validate() const;
  Vec3 center() const;
  Vec3 to_camera(const Vec3& world) const { return world_to_cam.apply(world); }
  bool contains(const Vec2& pixel) const {
    return pixel.x() >= 0.0 && pixel.y() >= 0.0 && pixel.x() < width && pixel.y() < height;
  }
  double diagonal() const;
};

// Camera at `eye` looking at `target`; image y axis points away from `up`.
Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double fx, double fy,
               double cx, double cy, int width, int height);

// Throws kBehindCamera when the camera-frame depth is not positive.
Vec2 project(const Camera& camera, const Vec3& point_world);
Ray pixel_ray(const Camera& camera, const Vec2& pixel);

struct RayPairMidpoint {
  Vec3 midpoint;
  double gap = 0.0;
};

// Closest points restricted to non-negative ray parameters. Throws kParallel when
// |dot(a.direction, b.direction)| > 1 - 1e-9.
RayPairMidpoint ray_pair_midpoint(const Ray& a, const Ray& b);

}  // namespace curvpose
