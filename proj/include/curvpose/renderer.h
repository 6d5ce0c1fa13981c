#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "curvpose/geometry.h"
#include "curvpose/image.h"
#include "curvpose/mesh.h"

namespace curvpose {

inline constexpr std::int32_t kNoObject = -1;
inline constexpr double kNearPlane = 1e-3;  // meters

// View-space normal map stored as three planes with a one-pixel zero border, so
// that the Prewitt stencil can run over the whole image without bounds checks.
// Uncovered pixels hold the zero vector.
class NormalPlanes {
 public:
  NormalPlanes() = default;
  NormalPlanes(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  std::ptrdiff_t stride() const { return width_ + 2; }

  // Pointer to pixel (row, col) of channel c (0 = x, 1 = y, 2 = z).
  float* at(int c, int row, int col) { return planes_[c].data() + offset(row, col); }
  const float* at(int c, int row, int col) const { return planes_[c].data() + offset(row, col); }

  Eigen::Vector3f normal(int row, int col) const;
  void set(int row, int col, const Eigen::Vector3f& n);
  bool covered(int row, int col) const;

  void clear();
  // Copies the pixels of `box` from `src`, which must have the same shape.
  void copy_box(const NormalPlanes& src, const PixelBox& box);

  bool operator==(const NormalPlanes& other) const = default;

 private:
  std::size_t offset(int row, int col) const {
    return static_cast<std::size_t>(row + 1) * static_cast<std::size_t>(stride()) +
           static_cast<std::size_t>(col + 1);
  }

  int width_ = 0;
  int height_ = 0;
  std::array<std::vector<float>, 3> planes_;
};

// One camera's rasterization result.
struct ViewRender {
  ImageF depth;                       // camera-frame z in meters, +inf where empty
  Image<std::int32_t> object_index;   // kNoObject where empty
  NormalPlanes normals;               // unit, facing the camera

  void clear();
  void copy_box(const ViewRender& src, const PixelBox& box);
};

struct PlacedMesh {
  const Mesh* mesh = nullptr;
  Pose pose;
};

ViewRender make_empty_view(const Camera& camera);

// Z-tested draw of one object into `target` (strict less-than, so earlier draws
// win ties). Returns the bounding box of the pixels that were written.
PixelBox draw_object(const PlacedMesh& object, std::int32_t object_index, const Camera& camera,
                     ViewRender& target);

// Objects are drawn in list order; object_index refers to list positions.
ViewRender rasterize(std::span<const PlacedMesh> objects, const Camera& camera);

ImageF curvature_from_normals(const NormalPlanes& normals);
// Curvature of pixels [x0, x1) in `row`, written to out[0 .. x1 - x0).
void curvature_row(const NormalPlanes& normals, int row, int x0, int x1, float* out);

struct RenderedViews {
  std::vector<ViewRender> views;
  std::vector<ImageF> curvature;
};

// rasterize + curvature_from_normals for every camera. Views are rendered in
// parallel; the result does not depend on the thread count.
RenderedViews render_curvature(std::span<const PlacedMesh> objects, std::span<const Camera> cameras,
                               int threads = 1);

}  // namespace curvpose
