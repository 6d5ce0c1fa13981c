#pragma once

#include <array>
#include <vector>

#include "curvpose/geometry.h"

namespace curvpose {

// Triangle mesh in the object frame (meters). Face normals are stored so that
// coplanar faces built by the primitive generators share bit-identical normals.
struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Vec3> face_normals;  // unit, one per triangle
  double diameter = 0.0;           // max pairwise vertex distance
  Vec3 bbox_extents = Vec3::Zero();
  Vec3 bbox_center = Vec3::Zero();
};

// Validates indices and derives normals, diameter and bounding box.
// Throws kEmptyMesh for no vertices/triangles and kValidationError otherwise.
Mesh make_mesh(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> triangles);
Mesh make_mesh(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> triangles,
               std::vector<Vec3> face_normals);

// Rigid transforms S in the object frame with S(V_M) = V_M. Always holds identity.
using SymmetrySet = std::vector<Pose>;

// Symmetric Hausdorff distance between V_M and S(V_M).
double symmetry_residual(const Mesh& mesh, const Pose& symmetry);

}  // namespace curvpose
