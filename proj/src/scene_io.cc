#include "curvpose/scene_io.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "curvpose/errors.h"

namespace curvpose {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kMaxRejections = 10000;

std::vector<Pose> box_symmetries(const Vec3& dims) {
  std::vector<Pose> out;
  std::array<int, 3> perm{0, 1, 2};
  do {
    for (int signs = 0; signs < 8; ++signs) {
      Mat3 m = Mat3::Zero();
      bool ok = true;
      for (int i = 0; i < 3; ++i) {
        m(i, perm[i]) = (signs >> i) & 1 ? -1.0 : 1.0;
        if (dims[i] != dims[perm[i]]) ok = false;
      }
      if (ok && m.determinant() > 0.0) out.emplace_back(m, Vec3::Zero());
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  // Identity is generated first: perm (0, 1, 2) with all signs positive.
  return out;
}

Mesh make_box(const Vec3& dims) {
  const Vec3 h = 0.5 * dims;
  std::vector<Vec3> v;
  for (int k = 0; k < 8; ++k) {
    v.emplace_back(k & 1 ? h.x() : -h.x(), k & 2 ? h.y() : -h.y(), k & 4 ? h.z() : -h.z());
  }
  std::vector<std::array<int, 3>> tris;
  std::vector<Vec3> normals;
  auto quad = [&](int a, int b, int c, int d, const Vec3& n) {
    tris.push_back({a, b, c});
    tris.push_back({a, c, d});
    normals.push_back(n);
    normals.push_back(n);
  };
  // Counter-clockwise seen from outside.
  quad(0, 4, 6, 2, -Vec3::UnitX());
  quad(1, 3, 7, 5, Vec3::UnitX());
  quad(0, 1, 5, 4, -Vec3::UnitY());
  quad(2, 6, 7, 3, Vec3::UnitY());
  quad(0, 2, 3, 1, -Vec3::UnitZ());
  quad(4, 5, 7, 6, Vec3::UnitZ());
  return make_mesh(std::move(v), std::move(tris), std::move(normals));
}

Mesh make_cylinder(double radius, double height, int segments) {
  std::vector<Vec3> v;
  const double hz = 0.5 * height;
  for (int ring = 0; ring < 2; ++ring) {
    for (int k = 0; k < segments; ++k) {
      const double a = 2.0 * M_PI * k / segments;
      v.emplace_back(radius * std::cos(a), radius * std::sin(a), ring == 0 ? -hz : hz);
    }
  }
  const int bottom = static_cast<int>(v.size());
  v.emplace_back(0.0, 0.0, -hz);
  const int top = static_cast<int>(v.size());
  v.emplace_back(0.0, 0.0, hz);

  std::vector<std::array<int, 3>> tris;
  std::vector<Vec3> normals;
  for (int k = 0; k < segments; ++k) {
    const int k1 = (k + 1) % segments;
    const double mid = 2.0 * M_PI * (k + 0.5) / segments;
    const Vec3 side(std::cos(mid), std::sin(mid), 0.0);
    tris.push_back({k, k1, segments + k1});
    tris.push_back({k, segments + k1, segments + k});
    normals.push_back(side);
    normals.push_back(side);
    tris.push_back({bottom, k1, k});
    normals.push_back(-Vec3::UnitZ());
    tris.push_back({top, segments + k, segments + k1});
    normals.push_back(Vec3::UnitZ());
  }
  return make_mesh(std::move(v), std::move(tris), std::move(normals));
}

std::vector<Pose> cylinder_symmetries(int segments) {
  std::vector<Pose> out;
  const Mat3 flip = Eigen::AngleAxisd(M_PI, Vec3::UnitX()).toRotationMatrix();
  for (int f = 0; f < 2; ++f) {
    for (int k = 0; k < segments; ++k) {
      Mat3 r = Eigen::AngleAxisd(2.0 * M_PI * k / segments, Vec3::UnitZ()).toRotationMatrix();
      if (f == 1) r = r * flip;
      if (k == 0 && f == 0) r = Mat3::Identity();
      out.emplace_back(r, Vec3::Zero());
    }
  }
  return out;
}

Mesh make_l_bracket(double leg_x, double leg_y, double thickness, double depth) {
  const double ox = 0.5 * leg_x;
  const double oy = 0.5 * leg_y;
  const std::array<Vec2, 6> profile{Vec2(0, 0),         Vec2(leg_x, 0),         Vec2(leg_x, thickness),
                                    Vec2(thickness, thickness), Vec2(thickness, leg_y), Vec2(0, leg_y)};
  std::vector<Vec3> v;
  for (int layer = 0; layer < 2; ++layer) {
    for (const Vec2& p : profile) v.emplace_back(p.x() - ox, p.y() - oy, layer == 0 ? -0.5 * depth : 0.5 * depth);
  }
  std::vector<std::array<int, 3>> tris;
  std::vector<Vec3> normals;
  // Caps: fan from the inner-corner-free vertex 0; the L is star-shaped from it.
  for (int k = 1; k + 1 < 6; ++k) {
    tris.push_back({0, k + 1, k});
    normals.push_back(-Vec3::UnitZ());
    tris.push_back({6, 6 + k, 6 + k + 1});
    normals.push_back(Vec3::UnitZ());
  }
  for (int k = 0; k < 6; ++k) {
    const int k1 = (k + 1) % 6;
    const Vec2 d = profile[k1] - profile[k];
    const Vec3 n = Vec3(d.y(), -d.x(), 0.0).normalized();
    tris.push_back({k, k1, 6 + k1});
    tris.push_back({k, 6 + k1, 6 + k});
    normals.push_back(n);
    normals.push_back(n);
  }
  return make_mesh(std::move(v), std::move(tris), std::move(normals));
}

void require_dims(const PrimitiveSpec& spec, std::size_t n) {
  if (spec.dims.size() != n) {
    throw Error(ErrorCode::kInvalidDimensions, std::string(primitive_kind_name(spec.kind)) + " needs " +
                                                   std::to_string(n) + " dimensions");
  }
  for (double d : spec.dims) {
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw Error(ErrorCode::kInvalidDimensions, "primitive dimensions must be positive");
    }
  }
}

json vec_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::kMalformedFile, "expected a 3-vector");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json primitive_to_json(const PrimitiveSpec& p) {
  return {{"kind", primitive_kind_name(p.kind)}, {"dims", p.dims}, {"segments", p.segments}};
}

PrimitiveSpec primitive_from_json(const json& j) {
  PrimitiveSpec p;
  p.kind = parse_primitive_kind(j.at("kind").get<std::string>());
  p.dims = j.at("dims").get<std::vector<double>>();
  p.segments = j.value("segments", 64);
  return p;
}

std::string trim_comment(const std::string& line) {
  const auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

Mesh read_ply(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open mesh " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0) {
    throw Error(ErrorCode::kMalformedFile, path.string() + ": not a PLY file");
  }
  std::size_t n_vertices = 0, n_faces = 0;
  std::vector<std::string> vertex_props, face_props;
  std::string current;
  bool ascii = false;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (word == "format") {
      std::string fmt;
      ss >> fmt;
      ascii = fmt == "ascii";
    } else if (word == "element") {
      ss >> current;
      std::size_t count = 0;
      ss >> count;
      if (current == "vertex") n_vertices = count;
      if (current == "face") n_faces = count;
    } else if (word == "property") {
      std::string type, name;
      ss >> type;
      if (type == "list") {
        std::string t1, t2;
        ss >> t1 >> t2 >> name;
        name = "list:" + name;
      } else {
        ss >> name;
      }
      if (current == "vertex") vertex_props.push_back(name);
      if (current == "face") face_props.push_back(name);
    } else if (word == "end_header") {
      break;
    }
  }
  if (!ascii) throw Error(ErrorCode::kMalformedFile, path.string() + ": only ASCII PLY is supported");
  auto index_of = [](const std::vector<std::string>& props, const std::string& name) {
    const auto it = std::find(props.begin(), props.end(), name);
    return it == props.end() ? -1 : static_cast<int>(it - props.begin());
  };
  const int ix = index_of(vertex_props, "x"), iy = index_of(vertex_props, "y"), iz = index_of(vertex_props, "z");
  if (ix < 0 || iy < 0 || iz < 0) throw Error(ErrorCode::kMalformedFile, path.string() + ": missing x/y/z");

  std::vector<Vec3> vertices(n_vertices);
  for (std::size_t k = 0; k < n_vertices; ++k) {
    std::vector<double> vals(vertex_props.size());
    for (double& x : vals) {
      if (!(in >> x)) throw Error(ErrorCode::kMalformedFile, path.string() + ": truncated vertex data");
    }
    vertices[k] = Vec3(vals[ix], vals[iy], vals[iz]);
  }
  const bool has_normals = index_of(face_props, "nx") >= 0;
  std::vector<std::array<int, 3>> tris(n_faces);
  std::vector<Vec3> normals;
  for (std::size_t f = 0; f < n_faces; ++f) {
    Vec3 n = Vec3::Zero();
    for (const std::string& prop : face_props) {
      if (prop.rfind("list:", 0) == 0) {
        int count = 0;
        if (!(in >> count)) throw Error(ErrorCode::kMalformedFile, path.string() + ": truncated face data");
        if (count != 3) throw Error(ErrorCode::kMalformedFile, path.string() + ": only triangles are supported");
        for (int& idx : tris[f]) in >> idx;
      } else {
        double x = 0.0;
        in >> x;
        if (prop == "nx") n.x() = x;
        if (prop == "ny") n.y() = x;
        if (prop == "nz") n.z() = x;
      }
    }
    if (!in) throw Error(ErrorCode::kMalformedFile, path.string() + ": truncated face data");
    normals.push_back(n);
  }
  if (has_normals) return make_mesh(std::move(vertices), std::move(tris), std::move(normals));
  return make_mesh(std::move(vertices), std::move(tris));
}

Mesh read_obj(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open mesh " + path.string());
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> tris;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(trim_comment(line));
    std::string tag;
    if (!(ss >> tag)) continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ss >> p.x() >> p.y() >> p.z())) throw Error(ErrorCode::kMalformedFile, path.string() + ": bad vertex");
      vertices.push_back(p);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ss >> tok) {
        const int i = std::stoi(tok.substr(0, tok.find('/')));
        idx.push_back(i < 0 ? static_cast<int>(vertices.size()) + i : i - 1);
      }
      if (idx.size() != 3) throw Error(ErrorCode::kMalformedFile, path.string() + ": only triangles are supported");
      tris.push_back({idx[0], idx[1], idx[2]});
    }
  }
  return make_mesh(std::move(vertices), std::move(tris));
}

}  // namespace

const char* primitive_kind_name(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::kCube: return "cube";
    case PrimitiveKind::kCuboid: return "cuboid";
    case PrimitiveKind::kCylinder: return "cylinder";
    case PrimitiveKind::kLBracket: return "l-bracket";
  }
  return "unknown";
}

PrimitiveKind parse_primitive_kind(const std::string& name) {
  for (PrimitiveKind k : {PrimitiveKind::kCube, PrimitiveKind::kCuboid, PrimitiveKind::kCylinder,
                          PrimitiveKind::kLBracket}) {
    if (name == primitive_kind_name(k)) return k;
  }
  throw Error(ErrorCode::kValidationError, "unknown primitive kind '" + name + "'");
}

std::pair<Mesh, SymmetrySet> primitive_mesh(const PrimitiveSpec& spec) {
  switch (spec.kind) {
    case PrimitiveKind::kCube: {
      require_dims(spec, 1);
      const Vec3 dims = Vec3::Constant(spec.dims[0]);
      return {make_box(dims), box_symmetries(dims)};
    }
    case PrimitiveKind::kCuboid: {
      require_dims(spec, 3);
      const Vec3 dims(spec.dims[0], spec.dims[1], spec.dims[2]);
      return {make_box(dims), box_symmetries(dims)};
    }
    case PrimitiveKind::kCylinder: {
      require_dims(spec, 2);
      if (spec.segments < 3 || spec.segments % 2 != 0) {
        throw Error(ErrorCode::kInvalidDimensions, "cylinder segments must be even and >= 4");
      }
      return {make_cylinder(spec.dims[0], spec.dims[1], spec.segments), cylinder_symmetries(spec.segments)};
    }
    case PrimitiveKind::kLBracket: {
      require_dims(spec, 4);
      const double lx = spec.dims[0], ly = spec.dims[1], t = spec.dims[2];
      if (lx == ly) throw Error(ErrorCode::kInvalidDimensions, "l-bracket legs must differ in length");
      if (!(t < std::min(lx, ly))) throw Error(ErrorCode::kInvalidDimensions, "l-bracket thickness exceeds a leg");
      return {make_l_bracket(lx, ly, t, spec.dims[3]), SymmetrySet{Pose::identity()}};
    }
  }
  throw Error(ErrorCode::kInvalidDimensions, "unknown primitive");
}

const ObjectClass& Scene::class_by_id(int id) const {
  for (const ObjectClass& c : classes) {
    if (c.id == id) return c;
  }
  throw Error(ErrorCode::kValidationError, "unknown class id " + std::to_string(id));
}

void Scene::validate() const {
  for (std::size_t i = 0; i < classes.size(); ++i) {
    for (std::size_t j = i + 1; j < classes.size(); ++j) {
      if (classes[i].id == classes[j].id) {
        throw Error(ErrorCode::kValidationError, "duplicate class id " + std::to_string(classes[i].id));
      }
    }
    if (classes[i].symmetries.empty()) {
      throw Error(ErrorCode::kValidationError, "class " + std::to_string(classes[i].id) + " has no symmetry set");
    }
  }
  for (const Instance& inst : instances) class_by_id(inst.class_id);
  for (const Camera& c : cameras) c.validate();
}

Vec3 Scene::instance_center(const Instance& inst) const {
  return inst.pose.apply(class_by_id(inst.class_id).mesh.bbox_center);
}

void SceneSpec::validate() const {
  if (n_objects < 0) throw Error(ErrorCode::kValidationError, "n_objects must be >= 0");
  if (n_objects > 0 && classes.empty()) throw Error(ErrorCode::kValidationError, "scene spec has no classes");
  if (!(min_spacing > 0.0)) throw Error(ErrorCode::kValidationError, "min_spacing must be > 0");
  if (ring.n_views < 2) throw Error(ErrorCode::kValidationError, "camera ring needs at least two views");
  if ((region_half_extent.array() < 0.0).any()) {
    throw Error(ErrorCode::kValidationError, "region half extents must be >= 0");
  }
}

std::vector<Camera> make_camera_ring(const CameraRing& ring, const Vec3& target) {
  std::vector<Camera> out;
  for (int k = 0; k < ring.n_views; ++k) {
    const double a = 2.0 * M_PI * k / ring.n_views;
    const Vec3 eye = target + Vec3(ring.radius * std::cos(a), ring.radius * std::sin(a), ring.height);
    out.push_back(look_at(eye, target, Vec3::UnitZ(), ring.fx, ring.fy, 0.5 * ring.image_width,
                          0.5 * ring.image_height, ring.image_width, ring.image_height));
  }
  return out;
}

Mat3 uniform_rotation(double u1, double u2, double u3) {
  const double a = std::sqrt(1.0 - u1);
  const double b = std::sqrt(u1);
  const Eigen::Quaterniond q(b * std::cos(2.0 * M_PI * u3), a * std::sin(2.0 * M_PI * u2),
                             a * std::cos(2.0 * M_PI * u2), b * std::sin(2.0 * M_PI * u3));
  return q.normalized().toRotationMatrix();
}

Scene generate_scene(const SceneSpec& spec, std::mt19937_64& rng) {
  spec.validate();
  Scene scene;
  for (std::size_t k = 0; k < spec.classes.size(); ++k) {
    ObjectClass c;
    c.id = static_cast<int>(k);
    c.name = primitive_kind_name(spec.classes[k].kind);
    std::tie(c.mesh, c.symmetries) = primitive_mesh(spec.classes[k]);
    c.primitive = spec.classes[k];
    scene.classes.push_back(std::move(c));
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vec3> centers;
  for (int n = 0; n < spec.n_objects; ++n) {
    const int cls = static_cast<int>(std::min<double>(unit(rng) * spec.classes.size(), spec.classes.size() - 1));
    Vec3 pos;
    int rejections = 0;
    while (true) {
      for (int i = 0; i < 3; ++i) pos[i] = spec.region_center[i] + (2.0 * unit(rng) - 1.0) * spec.region_half_extent[i];
      const bool ok = std::all_of(centers.begin(), centers.end(),
                                  [&](const Vec3& c) { return (c - pos).norm() >= spec.min_spacing; });
      if (ok) break;
      if (++rejections >= kMaxRejections) {
        throw Error(ErrorCode::kPlacementFailed,
                    "could not place object " + std::to_string(n) + " after 10000 attempts");
      }
    }
    const double u1 = unit(rng), u2 = unit(rng), u3 = unit(rng);
    const Mat3 r = uniform_rotation(u1, u2, u3);
    // Instance poses place the bounding-box center at `pos`.
    const Vec3 t = pos - r * scene.classes[cls].mesh.bbox_center;
    scene.instances.push_back({cls, Pose(r, t)});
    centers.push_back(pos);
  }
  scene.cameras = make_camera_ring(spec.ring, spec.region_center);
  return scene;
}

Scene generate_scene(const SceneSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return generate_scene(spec, rng);
}

SceneSpec reference_spec() {
  SceneSpec spec;
  spec.n_objects = 3;
  spec.classes = {{PrimitiveKind::kCuboid, {0.10, 0.06, 0.04}, 64},
                  {PrimitiveKind::kCuboid, {0.08, 0.05, 0.03}, 64},
                  {PrimitiveKind::kCuboid, {0.12, 0.05, 0.035}, 64}};
  spec.min_spacing = 0.12;
  return spec;
}

Scene reference_scene() {
  const SceneSpec spec = reference_spec();
  Scene scene;
  for (std::size_t k = 0; k < spec.classes.size(); ++k) {
    ObjectClass c;
    c.id = static_cast<int>(k);
    c.name = "cuboid";
    std::tie(c.mesh, c.symmetries) = primitive_mesh(spec.classes[k]);
    c.primitive = spec.classes[k];
    scene.classes.push_back(std::move(c));
  }
  const std::array<Vec3, 3> positions{Vec3(-0.11, -0.02, 0.0), Vec3(0.07, 0.10, 0.01), Vec3(0.05, -0.11, -0.01)};
  const std::array<Vec3, 3> rotations{Vec3(0.3, -0.5, 0.9), Vec3(-1.1, 0.4, 0.2), Vec3(0.6, 0.8, -1.4)};
  for (int k = 0; k < 3; ++k) {
    scene.instances.push_back({k, Pose::from_axis_angle(rotations[k], positions[k])});
  }
  scene.cameras = make_camera_ring(spec.ring, spec.region_center);
  return scene;
}

json pose_to_json(const Pose& pose) {
  json rot = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) rot.push_back(pose.rotation()(r, c));
  }
  return {{"rotation", rot}, {"translation", vec_to_json(pose.translation())}};
}

Pose pose_from_json(const json& j) {
  const auto rot = j.at("rotation").get<std::vector<double>>();
  if (rot.size() != 9) throw Error(ErrorCode::kMalformedFile, "rotation needs 9 values");
  Mat3 r;
  for (int k = 0; k < 9; ++k) r(k / 3, k % 3) = rot[k];
  return Pose(r, vec_from_json(j.at("translation")));
}

json camera_to_json(const Camera& c) {
  return {{"fx", c.fx},       {"fy", c.fy},         {"cx", c.cx},
          {"cy", c.cy},       {"width", c.width},   {"height", c.height},
          {"world_to_cam", pose_to_json(c.world_to_cam)}};
}

Camera camera_from_json(const json& j) {
  Camera c;
  c.fx = j.at("fx").get<double>();
  c.fy = j.at("fy").get<double>();
  c.cx = j.at("cx").get<double>();
  c.cy = j.at("cy").get<double>();
  c.width = j.at("width").get<int>();
  c.height = j.at("height").get<int>();
  c.world_to_cam = pose_from_json(j.at("world_to_cam"));
  c.validate();
  return c;
}

json spec_to_json(const SceneSpec& spec) {
  json classes = json::array();
  for (const PrimitiveSpec& p : spec.classes) classes.push_back(primitive_to_json(p));
  return {{"n_objects", spec.n_objects},
          {"classes", classes},
          {"region_center", vec_to_json(spec.region_center)},
          {"region_half_extent", vec_to_json(spec.region_half_extent)},
          {"min_spacing", spec.min_spacing},
          {"camera_ring",
           {{"n_views", spec.ring.n_views},
            {"radius", spec.ring.radius},
            {"height", spec.ring.height},
            {"image_width", spec.ring.image_width},
            {"image_height", spec.ring.image_height},
            {"fx", spec.ring.fx},
            {"fy", spec.ring.fy}}}};
}

SceneSpec spec_from_json(const json& j) {
  try {
    SceneSpec spec;
    spec.n_objects = j.value("n_objects", spec.n_objects);
    if (j.contains("classes")) {
      spec.classes.clear();
      for (const json& c : j.at("classes")) spec.classes.push_back(primitive_from_json(c));
    }
    if (j.contains("region_center")) spec.region_center = vec_from_json(j.at("region_center"));
    if (j.contains("region_half_extent")) spec.region_half_extent = vec_from_json(j.at("region_half_extent"));
    spec.min_spacing = j.value("min_spacing", spec.min_spacing);
    if (j.contains("camera_ring")) {
      const json& r = j.at("camera_ring");
      spec.ring.n_views = r.value("n_views", spec.ring.n_views);
      spec.ring.radius = r.value("radius", spec.ring.radius);
      spec.ring.height = r.value("height", spec.ring.height);
      spec.ring.image_width = r.value("image_width", spec.ring.image_width);
      spec.ring.image_height = r.value("image_height", spec.ring.image_height);
      spec.ring.fx = r.value("fx", spec.ring.fx);
      spec.ring.fy = r.value("fy", spec.ring.fy);
    }
    spec.validate();
    return spec;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedFile, std::string("scene spec: ") + e.what());
  }
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedFile, path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

void check_version(const json& j, const std::string& what) {
  if (!j.is_object() || !j.contains("version")) {
    throw Error(ErrorCode::kMalformedFile, what + ": missing version");
  }
  if (!j.at("version").is_number_integer() || j.at("version").get<int>() != kFormatVersion) {
    throw Error(ErrorCode::kUnknownVersion, what + ": unsupported version " + j.at("version").dump());
  }
}

void write_ply(const Mesh& mesh, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  std::fprintf(f, "ply\nformat ascii 1.0\nelement vertex %zu\nproperty double x\nproperty double y\n"
                  "property double z\nelement face %zu\nproperty list uchar int vertex_indices\n"
                  "property double nx\nproperty double ny\nproperty double nz\nend_header\n",
               mesh.vertices.size(), mesh.triangles.size());
  for (const Vec3& v : mesh.vertices) std::fprintf(f, "%.17g %.17g %.17g\n", v.x(), v.y(), v.z());
  for (std::size_t k = 0; k < mesh.triangles.size(); ++k) {
    const auto& t = mesh.triangles[k];
    const Vec3& n = mesh.face_normals[k];
    std::fprintf(f, "3 %d %d %d %.17g %.17g %.17g\n", t[0], t[1], t[2], n.x(), n.y(), n.z());
  }
  const bool ok = std::fclose(f) == 0;
  if (!ok) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

Mesh read_mesh(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::kMissingFile, "mesh file not found: " + path.string());
  const std::string ext = path.extension().string();
  if (ext == ".obj" || ext == ".OBJ") return read_obj(path);
  return read_ply(path);
}

void save_scene(const Scene& scene, const fs::path& path) {
  scene.validate();
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  json classes = json::array();
  for (const ObjectClass& c : scene.classes) {
    const std::string rel = "meshes/class_" + std::to_string(c.id) + ".ply";
    write_ply(c.mesh, dir / rel);
    json syms = json::array();
    for (const Pose& s : c.symmetries) syms.push_back(pose_to_json(s));
    json jc = {{"id", c.id}, {"name", c.name}, {"mesh", rel}, {"symmetries", syms}};
    if (c.primitive) jc["primitive"] = primitive_to_json(*c.primitive);
    classes.push_back(jc);
  }
  json instances = json::array();
  for (const Instance& inst : scene.instances) {
    json ji = pose_to_json(inst.pose);
    ji["class_id"] = inst.class_id;
    instances.push_back(ji);
  }
  json cameras = json::array();
  for (const Camera& c : scene.cameras) cameras.push_back(camera_to_json(c));
  write_json(path, {{"version", kFormatVersion}, {"classes", classes}, {"instances", instances}, {"cameras", cameras}});
}

Scene load_scene(const fs::path& path) {
  const json j = read_json(path);
  check_version(j, path.string());
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  Scene scene;
  try {
    for (const json& jc : j.at("classes")) {
      ObjectClass c;
      c.id = jc.at("id").get<int>();
      c.name = jc.value("name", std::string());
      c.mesh = read_mesh(dir / jc.at("mesh").get<std::string>());
      for (const json& s : jc.at("symmetries")) c.symmetries.push_back(pose_from_json(s));
      if (c.symmetries.empty()) c.symmetries.push_back(Pose::identity());
      if (jc.contains("primitive")) c.primitive = primitive_from_json(jc.at("primitive"));
      scene.classes.push_back(std::move(c));
    }
    for (const json& ji : j.at("instances")) {
      scene.instances.push_back({ji.at("class_id").get<int>(), pose_from_json(ji)});
    }
    for (const json& jc : j.at("cameras")) scene.cameras.push_back(camera_from_json(jc));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedFile, path.string() + ": " + e.what());
  }
  scene.validate();
  return scene;
}

}  // namespace curvpose
