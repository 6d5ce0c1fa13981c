#include "curvpose/renderer.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "curvpose/errors.h"
#include "curvpose/parallel.h"
#include "curvpose/simd/kernels.h"

namespace curvpose {
namespace {

constexpr float kEmptyDepth = std::numeric_limits<float>::infinity();

struct ScreenVertex {
  double x;
  double y;
};

inline double edge(const ScreenVertex& a, const ScreenVertex& b, double px, double py) {
  return (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
}

// Shared edges are traversed in opposite directions by their two triangles, so
// exactly one of them owns the pixels lying on the edge.
inline bool owns_edge(const ScreenVertex& a, const ScreenVertex& b) {
  const double dy = b.y - a.y;
  return dy > 0.0 || (dy == 0.0 && b.x - a.x > 0.0);
}

struct FaceSetup {
  Vec3 normal;          // camera frame, oriented so that normal . X = offset < 0 on the plane
  double offset;
  Eigen::Vector3f normal_f;
};

class TriangleRasterizer {
 public:
  TriangleRasterizer(const Camera& camera, ViewRender& target, std::int32_t object_index)
      : cam_(camera), target_(target), object_index_(object_index) {}

  void draw(const FaceSetup& face, ScreenVertex a, ScreenVertex b, ScreenVertex c, PixelBox& touched) {
    double area = edge(a, b, c.x, c.y);
    if (area == 0.0 || !std::isfinite(area)) return;
    if (area < 0.0) std::swap(b, c);

    const double min_x = std::min({a.x, b.x, c.x});
    const double max_x = std::max({a.x, b.x, c.x});
    const double min_y = std::min({a.y, b.y, c.y});
    const double max_y = std::max({a.y, b.y, c.y});
    const int j0 = std::max(0, static_cast<int>(std::ceil(min_x - 0.5)));
    const int j1 = std::min(cam_.width - 1, static_cast<int>(std::floor(max_x - 0.5)));
    const int i0 = std::max(0, static_cast<int>(std::ceil(min_y - 0.5)));
    const int i1 = std::min(cam_.height - 1, static_cast<int>(std::floor(max_y - 0.5)));
    if (j0 > j1 || i0 > i1) return;

    const bool own0 = owns_edge(b, c);
    const bool own1 = owns_edge(c, a);
    const bool own2 = owns_edge(a, b);

    for (int i = i0; i <= i1; ++i) {
      const double py = i + 0.5;
      const double ray_y = (py - cam_.cy) / cam_.fy;
      float* depth_row = target_.depth.row(i);
      std::int32_t* index_row = target_.object_index.row(i);
      for (int j = j0; j <= j1; ++j) {
        const double px = j + 0.5;
        const double w0 = edge(b, c, px, py);
        const double w1 = edge(c, a, px, py);
        const double w2 = edge(a, b, px, py);
        if (!((w0 > 0.0 || (w0 == 0.0 && own0)) && (w1 > 0.0 || (w1 == 0.0 && own1)) &&
              (w2 > 0.0 || (w2 == 0.0 && own2)))) {
          continue;
        }
        const double ray_x = (px - cam_.cx) / cam_.fx;
        const double denom = face.normal.x() * ray_x + face.normal.y() * ray_y + face.normal.z();
        const double z = face.offset / denom;
        if (!(z > 0.0)) continue;
        const float zf = static_cast<float>(z);
        if (!(zf < depth_row[j])) continue;
        depth_row[j] = zf;
        index_row[j] = object_index_;
        target_.normals.set(i, j, face.normal_f);
        touched.include(j, i);
      }
    }
  }

 private:
  const Camera& cam_;
  ViewRender& target_;
  std::int32_t object_index_;
};

// Sutherland-Hodgman against z >= kNearPlane; at most 4 output vertices.
int clip_near(const std::array<Vec3, 3>& in, std::array<Vec3, 4>& out) {
  int n = 0;
  for (int k = 0; k < 3; ++k) {
    const Vec3& p = in[k];
    const Vec3& q = in[(k + 1) % 3];
    const bool p_in = p.z() >= kNearPlane;
    const bool q_in = q.z() >= kNearPlane;
    if (p_in) out[n++] = p;
    if (p_in != q_in) {
      const double t = (kNearPlane - p.z()) / (q.z() - p.z());
      out[n++] = p + t * (q - p);
    }
  }
  return n;
}

}  // namespace

NormalPlanes::NormalPlanes(int width, int height) : width_(width), height_(height) {
  const std::size_t n = static_cast<std::size_t>(width + 2) * static_cast<std::size_t>(height + 2);
  for (auto& p : planes_) p.assign(n, 0.0f);
}

Eigen::Vector3f NormalPlanes::normal(int row, int col) const {
  const std::size_t o = offset(row, col);
  return {planes_[0][o], planes_[1][o], planes_[2][o]};
}

void NormalPlanes::set(int row, int col, const Eigen::Vector3f& n) {
  const std::size_t o = offset(row, col);
  planes_[0][o] = n.x();
  planes_[1][o] = n.y();
  planes_[2][o] = n.z();
}

bool NormalPlanes::covered(int row, int col) const {
  const std::size_t o = offset(row, col);
  return planes_[0][o] != 0.0f || planes_[1][o] != 0.0f || planes_[2][o] != 0.0f;
}

void NormalPlanes::clear() {
  for (auto& p : planes_) std::fill(p.begin(), p.end(), 0.0f);
}

void NormalPlanes::copy_box(const NormalPlanes& src, const PixelBox& box) {
  if (box.empty()) return;
  for (int c = 0; c < 3; ++c) {
    for (int r = box.y0; r < box.y1; ++r) {
      std::copy(src.at(c, r, box.x0), src.at(c, r, box.x1), at(c, r, box.x0));
    }
  }
}

void ViewRender::clear() {
  depth.fill(kEmptyDepth);
  object_index.fill(kNoObject);
  normals.clear();
}

void ViewRender::copy_box(const ViewRender& src, const PixelBox& box) {
  if (box.empty()) return;
  for (int r = box.y0; r < box.y1; ++r) {
    std::copy(src.depth.row(r) + box.x0, src.depth.row(r) + box.x1, depth.row(r) + box.x0);
    std::copy(src.object_index.row(r) + box.x0, src.object_index.row(r) + box.x1,
              object_index.row(r) + box.x0);
  }
  normals.copy_box(src.normals, box);
}

ViewRender make_empty_view(const Camera& camera) {
  camera.validate();
  ViewRender view;
  view.depth = ImageF(camera.width, camera.height, kEmptyDepth);
  view.object_index = Image<std::int32_t>(camera.width, camera.height, kNoObject);
  view.normals = NormalPlanes(camera.width, camera.height);
  return view;
}

PixelBox draw_object(const PlacedMesh& object, std::int32_t object_index, const Camera& camera,
                     ViewRender& target) {
  PixelBox touched;
  if (object.mesh == nullptr) return touched;
  const Mesh& mesh = *object.mesh;
  const Pose cam_from_obj = compose(camera.world_to_cam, object.pose);
  const Mat3& r = cam_from_obj.rotation();
  const Vec3& t = cam_from_obj.translation();

  std::vector<Vec3> verts(mesh.vertices.size());
  for (std::size_t k = 0; k < verts.size(); ++k) verts[k] = r * mesh.vertices[k] + t;

  TriangleRasterizer raster(camera, target, object_index);
  std::array<Vec3, 4> clipped;
  for (std::size_t f = 0; f < mesh.triangles.size(); ++f) {
    const auto& tri = mesh.triangles[f];
    FaceSetup face;
    face.normal = r * mesh.face_normals[f];
    if (face.normal.squaredNorm() == 0.0) continue;
    const std::array<Vec3, 3> p{verts[tri[0]], verts[tri[1]], verts[tri[2]]};
    face.offset = face.normal.dot(p[0]);
    if (std::abs(face.offset) < 1e-12) continue;  // plane through the camera center
    if (face.offset > 0.0) {
      face.normal = -face.normal;
      face.offset = -face.offset;
    }
    face.normal_f = face.normal.cast<float>().normalized();

    const int n = clip_near(p, clipped);
    if (n < 3) continue;
    std::array<ScreenVertex, 4> s;
    for (int k = 0; k < n; ++k) {
      s[k] = {camera.fx * clipped[k].x() / clipped[k].z() + camera.cx,
              camera.fy * clipped[k].y() / clipped[k].z() + camera.cy};
    }
    for (int k = 1; k + 1 < n; ++k) raster.draw(face, s[0], s[k], s[k + 1], touched);
  }
  return touched;
}

ViewRender rasterize(std::span<const PlacedMesh> objects, const Camera& camera) {
  ViewRender view = make_empty_view(camera);
  for (std::size_t k = 0; k < objects.size(); ++k) {
    draw_object(objects[k], static_cast<std::int32_t>(k), camera, view);
  }
  return view;
}

void curvature_row(const NormalPlanes& normals, int row, int x0, int x1, float* out) {
  if (x1 <= x0) return;
  simd::prewitt_magnitude(normals.at(0, row, x0), normals.at(1, row, x0), normals.at(2, row, x0),
                          normals.stride(), out, static_cast<std::size_t>(x1 - x0));
}

ImageF curvature_from_normals(const NormalPlanes& normals) {
  ImageF out(normals.width(), normals.height(), 0.0f);
  for (int r = 0; r < normals.height(); ++r) curvature_row(normals, r, 0, normals.width(), out.row(r));
  return out;
}

RenderedViews render_curvature(std::span<const PlacedMesh> objects, std::span<const Camera> cameras,
                               int threads) {
  RenderedViews out;
  out.views.resize(cameras.size());
  out.curvature.resize(cameras.size());
  parallel_for(cameras.size(), threads, [&](std::size_t v, int) {
    out.views[v] = rasterize(objects, cameras[v]);
    out.curvature[v] = curvature_from_normals(out.views[v].normals);
  });
  return out;
}

}  // namespace curvpose
