#include "curvpose/geometry.h"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "curvpose/errors.h"

namespace curvpose {
namespace {

constexpr double kDriftTolerance = 1e-9;
constexpr double kParallelTolerance = 1e-9;

}  // namespace

double orthonormality_error(const Mat3& m) {
  return (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
}

Mat3 nearest_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  return u * v.transpose();
}

Pose::Pose(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  const double err = orthonormality_error(rotation);
  if (!(err <= 1e-6) || rotation.determinant() < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "pose rotation is not a proper rotation");
  }
  if (err > kDriftTolerance) rotation_ = nearest_rotation(rotation);
}

Pose Pose::from_axis_angle(const Vec3& axis_angle, const Vec3& translation) {
  return Pose(rotation_from_axis_angle(axis_angle), translation);
}

Vec3 Pose::axis_angle() const { return axis_angle_from_rotation(rotation_); }

Pose Pose::inverse() const {
  const Mat3 rt = rotation_.transpose();
  return Pose(rt, -(rt * translation_));
}

Pose compose(const Pose& a, const Pose& b) {
  return Pose(a.rotation() * b.rotation(), a.rotation() * b.translation() + a.translation());
}

Mat3 rotation_from_axis_angle(const Vec3& axis_angle) {
  const double angle = axis_angle.norm();
  if (angle < 1e-300) return Mat3::Identity();
  return Eigen::AngleAxisd(angle, axis_angle / angle).toRotationMatrix();
}

Vec3 axis_angle_from_rotation(const Mat3& rotation) {
  const Eigen::AngleAxisd aa(Eigen::Quaterniond(rotation).normalized());
  double angle = aa.angle();
  Vec3 axis = aa.axis();
  if (angle > M_PI) {
    angle = 2.0 * M_PI - angle;
    axis = -axis;
  }
  return axis * angle;
}

Ray make_ray(const Vec3& origin, const Vec3& direction) {
  const double n = direction.norm();
  if (!(n > 0.0)) throw Error(ErrorCode::kInvalidArgument, "ray direction is zero");
  return Ray{origin, direction / n};
}

void Camera::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "camera focal lengths must be positive");
  }
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kInvalidArgument, "camera image size must be at least 1x1");
  }
}

Vec3 Camera::center() const {
  return -(world_to_cam.rotation().transpose() * world_to_cam.translation());
}

double Camera::diagonal() const {
  return std::sqrt(static_cast<double>(width) * width + static_cast<double>(height) * height);
}

Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double fx, double fy,
               double cx, double cy, int width, int height) {
  const Vec3 z = (target - eye).normalized();
  Vec3 x = z.cross(up);
  if (x.norm() < 1e-12) throw Error(ErrorCode::kInvalidArgument, "look_at: up is parallel to view");
  x.normalize();
  const Vec3 y = z.cross(x);
  Mat3 r;
  r.row(0) = x.transpose();
  r.row(1) = y.transpose();
  r.row(2) = z.transpose();
  Camera cam;
  cam.fx = fx;
  cam.fy = fy;
  cam.cx = cx;
  cam.cy = cy;
  cam.width = width;
  cam.height = height;
  cam.world_to_cam = Pose(r, -(r * eye));
  cam.validate();
  return cam;
}

Vec2 project(const Camera& camera, const Vec3& point_world) {
  const Vec3 p = camera.to_camera(point_world);
  if (!(p.z() > 0.0)) throw Error(ErrorCode::kBehindCamera, "point has non-positive depth");
  return Vec2(camera.fx * p.x() / p.z() + camera.cx, camera.fy * p.y() / p.z() + camera.cy);
}

Ray pixel_ray(const Camera& camera, const Vec2& pixel) {
  const Vec3 dir_cam((pixel.x() - camera.cx) / camera.fx, (pixel.y() - camera.cy) / camera.fy, 1.0);
  const Mat3 cam_to_world = camera.world_to_cam.rotation().transpose();
  return make_ray(camera.center(), cam_to_world * dir_cam);
}

RayPairMidpoint ray_pair_midpoint(const Ray& a, const Ray& b) {
  const double dab = a.direction.dot(b.direction);
  if (std::abs(dab) > 1.0 - kParallelTolerance) {
    throw Error(ErrorCode::kParallel, "rays are (nearly) parallel");
  }
  const Vec3 w0 = a.origin - b.origin;
  const double aa = a.direction.dot(a.direction);
  const double bb = b.direction.dot(b.direction);
  const double da = a.direction.dot(w0);
  const double db = b.direction.dot(w0);
  const double den = aa * bb - dab * dab;
  double s = (dab * db - bb * da) / den;
  double t = (aa * db - dab * da) / den;

  if (s < 0.0 || t < 0.0) {
    // Minimum lies on the boundary s = 0 or t = 0 of the quadrant.
    const double t_at_s0 = std::max(0.0, db / bb);
    const double s_at_t0 = std::max(0.0, -da / aa);
    const double d_s0 = (a.origin - b.at(t_at_s0)).squaredNorm();
    const double d_t0 = (a.at(s_at_t0) - b.origin).squaredNorm();
    if (d_s0 < d_t0) {
      s = 0.0;
      t = t_at_s0;
    } else if (d_t0 < d_s0) {
      s = s_at_t0;
      t = 0.0;
    } else if (t_at_s0 <= s_at_t0) {
      s = 0.0;
      t = t_at_s0;
    } else {
      s = s_at_t0;
      t = 0.0;
    }
  }
  const Vec3 pa = a.at(s);
  const Vec3 pb = b.at(t);
  return RayPairMidpoint{0.5 * (pa + pb), (pa - pb).norm()};
}

}  // namespace curvpose
