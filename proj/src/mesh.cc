#include "curvpose/mesh.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "curvpose/errors.h"

namespace curvpose {
namespace {

void finish(Mesh& mesh) {
  Vec3 lo = mesh.vertices.front();
  Vec3 hi = lo;
  for (const Vec3& v : mesh.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  mesh.bbox_extents = hi - lo;
  mesh.bbox_center = 0.5 * (hi + lo);

  double best = 0.0;
  const std::size_t n = mesh.vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      best = std::max(best, (mesh.vertices[i] - mesh.vertices[j]).squaredNorm());
    }
  }
  mesh.diameter = std::sqrt(best);
  if (!(mesh.diameter > 0.0)) {
    throw Error(ErrorCode::kValidationError, "mesh has zero diameter");
  }
}

void check_topology(const Mesh& mesh) {
  if (mesh.vertices.empty() || mesh.triangles.empty()) {
    throw Error(ErrorCode::kEmptyMesh, "mesh has no vertices or no triangles");
  }
  const int n = static_cast<int>(mesh.vertices.size());
  for (std::size_t f = 0; f < mesh.triangles.size(); ++f) {
    for (int idx : mesh.triangles[f]) {
      if (idx < 0 || idx >= n) {
        throw Error(ErrorCode::kValidationError,
                    "triangle " + std::to_string(f) + " references vertex " + std::to_string(idx) +
                        " out of range");
      }
    }
  }
  for (const Vec3& v : mesh.vertices) {
    if (!v.allFinite()) throw Error(ErrorCode::kValidationError, "non-finite vertex");
  }
}

}  // namespace

Mesh make_mesh(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> triangles) {
  Mesh mesh;
  mesh.vertices = std::move(vertices);
  mesh.triangles = std::move(triangles);
  check_topology(mesh);
  mesh.face_normals.reserve(mesh.triangles.size());
  for (const auto& tri : mesh.triangles) {
    const Vec3& a = mesh.vertices[tri[0]];
    const Vec3 n = (mesh.vertices[tri[1]] - a).cross(mesh.vertices[tri[2]] - a);
    const double len = n.norm();
    // Degenerate faces keep a zero normal; the rasterizer never covers them.
    mesh.face_normals.push_back(len > 0.0 ? Vec3(n / len) : Vec3::Zero());
  }
  finish(mesh);
  return mesh;
}

Mesh make_mesh(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> triangles,
               std::vector<Vec3> face_normals) {
  Mesh mesh;
  mesh.vertices = std::move(vertices);
  mesh.triangles = std::move(triangles);
  check_topology(mesh);
  if (face_normals.size() != mesh.triangles.size()) {
    throw Error(ErrorCode::kValidationError, "face normal count does not match triangle count");
  }
  mesh.face_normals = std::move(face_normals);
  finish(mesh);
  return mesh;
}

double symmetry_residual(const Mesh& mesh, const Pose& symmetry) {
  auto directed = [&](bool forward) {
    double worst = 0.0;
    for (const Vec3& v : mesh.vertices) {
      const Vec3 p = forward ? symmetry.apply(v) : v;
      double best = std::numeric_limits<double>::infinity();
      for (const Vec3& w : mesh.vertices) {
        const Vec3 q = forward ? w : symmetry.apply(w);
        best = std::min(best, (p - q).squaredNorm());
      }
      worst = std::max(worst, best);
    }
    return std::sqrt(worst);
  };
  return std::max(directed(true), directed(false));
}

}  // namespace curvpose
