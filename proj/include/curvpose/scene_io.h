#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "curvpose/geometry.h"
#include "curvpose/mesh.h"

namespace curvpose {

inline constexpr int kFormatVersion = 1;

enum class PrimitiveKind { kCube, kCuboid, kCylinder, kLBracket };

const char* primitive_kind_name(PrimitiveKind kind);
PrimitiveKind parse_primitive_kind(const std::string& name);

// dims: cube {side}; cuboid {x, y, z}; cylinder {radius, height};
// l-bracket {leg_x, leg_y, thickness, depth} with leg_x != leg_y.
struct PrimitiveSpec {
  PrimitiveKind kind = PrimitiveKind::kCuboid;
  std::vector<double> dims;
  int segments = 64;  // cylinder tessellation and axial symmetry count
};

// Watertight mesh centered on its bounding box, plus its exact discrete
// symmetry group (cube 24, cuboid 4 with distinct dims, cylinder segments x 2,
// l-bracket identity only). Throws kInvalidDimensions.
std::pair<Mesh, SymmetrySet> primitive_mesh(const PrimitiveSpec& spec);

struct ObjectClass {
  int id = 0;
  std::string name;
  Mesh mesh;
  SymmetrySet symmetries;
  std::optional<PrimitiveSpec> primitive;
};

struct Instance {
  int class_id = 0;
  Pose pose;
};

struct Scene {
  std::vector<ObjectClass> classes;
  std::vector<Instance> instances;
  std::vector<Camera> cameras;

  // Throws kValidationError naming the offending id.
  const ObjectClass& class_by_id(int id) const;
  void validate() const;
  Vec3 instance_center(const Instance& inst) const;
};

struct CameraRing {
  int n_views = 6;
  double radius = 0.8;   // m, horizontal distance from the region center
  double height = 0.6;   // m, above the region center
  int image_width = 320;
  int image_height = 256;
  double fx = 450.0;
  double fy = 450.0;
};

struct SceneSpec {
  int n_objects = 3;
  std::vector<PrimitiveSpec> classes;  // instances draw their class uniformly
  Vec3 region_center = Vec3::Zero();
  Vec3 region_half_extent = Vec3(0.12, 0.12, 0.03);
  double min_spacing = 0.1;
  CameraRing ring;

  void validate() const;
};

std::vector<Camera> make_camera_ring(const CameraRing& ring, const Vec3& target);

// Draw order per object: class index, position (x, y, z), then a uniform
// quaternion (3 uniforms). Rejected positions are redrawn; after 10,000
// consecutive rejections throws kPlacementFailed.
Scene generate_scene(const SceneSpec& spec, std::mt19937_64& rng);
Scene generate_scene(const SceneSpec& spec, std::uint64_t seed);

// Fixed three-cuboid scene seen by the default six-view ring; no object
// occludes another in any view.
Scene reference_scene();
SceneSpec reference_spec();

// Uniform rotation from three uniforms in [0, 1) (Shoemake).
Mat3 uniform_rotation(double u1, double u2, double u3);

// Meshes are written as ASCII PLY under <dir of path>/meshes/.
void save_scene(const Scene& scene, const std::filesystem::path& path);
Scene load_scene(const std::filesystem::path& path);

Mesh read_mesh(const std::filesystem::path& path);  // .ply (ASCII) or .obj
void write_ply(const Mesh& mesh, const std::filesystem::path& path);

// JSON helpers shared by the file formats.
nlohmann::json pose_to_json(const Pose& pose);
Pose pose_from_json(const nlohmann::json& j);
nlohmann::json camera_to_json(const Camera& camera);
Camera camera_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const SceneSpec& spec);
SceneSpec spec_from_json(const nlohmann::json& j);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
void check_version(const nlohmann::json& j, const std::string& what);

}  // namespace curvpose
