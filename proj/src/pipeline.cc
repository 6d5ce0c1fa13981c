#include "curvpose/pipeline.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "curvpose/errors.h"
#include "curvpose/grid_io.h"

namespace curvpose {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string center_name(int class_id, int view) {
  return "center_c" + std::to_string(class_id) + "_v" + std::to_string(view);
}

std::string curvature_name(int view) { return "curvature_v" + std::to_string(view); }

std::vector<double> to_vector(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

}  // namespace

OracleData make_oracle(const Scene& scene, const HeatmapConfig& config, std::mt19937_64& rng) {
  config.validate();
  scene.validate();
  OracleData data;
  data.noise_sigma = config.noise_sigma;
  std::vector<PlacedMesh> objects;
  for (const Instance& inst : scene.instances) objects.push_back({&scene.class_by_id(inst.class_id).mesh, inst.pose});

  for (const ObjectClass& cls : scene.classes) {
    std::vector<Vec3> centers;
    std::vector<const Mesh*> meshes;
    for (const Instance& inst : scene.instances) {
      if (inst.class_id != cls.id) continue;
      centers.push_back(scene.instance_center(inst));
      meshes.push_back(&cls.mesh);
    }
    std::vector<Heatmap> views;
    for (std::size_t v = 0; v < scene.cameras.size(); ++v) {
      const Heatmap h = center_heatmap(centers, meshes, scene.cameras[v], config, static_cast<int>(v));
      views.push_back(corrupt(h, config.noise_sigma, rng(), true));
    }
    data.class_ids.push_back(cls.id);
    data.centers.push_back(std::move(views));
  }
  for (std::size_t v = 0; v < scene.cameras.size(); ++v) {
    const Heatmap h = curvature_target(objects, scene.cameras[v], static_cast<int>(v));
    data.curvature.push_back(corrupt(h, config.noise_sigma, rng(), false));
  }
  return data;
}

void save_oracle(const OracleData& data, const fs::path& dir, bool png) {
  const fs::path hdir = dir / "heatmaps";
  fs::create_directories(hdir);
  for (std::size_t c = 0; c < data.class_ids.size(); ++c) {
    for (const Heatmap& h : data.centers[c]) {
      const std::string name = center_name(data.class_ids[c], h.view_index);
      write_raw_grid(hdir / (name + ".f32"), h.values);
      if (png) export_png16(hdir / (name + ".png"), h.values, "center", h.view_index);
    }
  }
  for (const Heatmap& h : data.curvature) {
    write_raw_grid(hdir / (curvature_name(h.view_index) + ".f32"), h.values);
    if (png) export_png16(hdir / (curvature_name(h.view_index) + ".png"), h.values, "curvature", h.view_index);
  }
  write_json(dir / "oracle.json", {{"version", kFormatVersion},
                                   {"class_ids", data.class_ids},
                                   {"views", data.curvature.size()},
                                   {"noise_sigma", data.noise_sigma}});
}

OracleData load_oracle(const fs::path& dir) {
  const json j = read_json(dir / "oracle.json");
  check_version(j, (dir / "oracle.json").string());
  OracleData data;
  try {
    data.class_ids = j.at("class_ids").get<std::vector<int>>();
    data.noise_sigma = j.value("noise_sigma", 0.0);
    const int views = j.at("views").get<int>();
    for (int id : data.class_ids) {
      std::vector<Heatmap> maps;
      for (int v = 0; v < views; ++v) {
        maps.push_back({read_raw_grid(dir / "heatmaps" / (center_name(id, v) + ".f32")), v});
      }
      data.centers.push_back(std::move(maps));
    }
    for (int v = 0; v < views; ++v) {
      data.curvature.push_back({read_raw_grid(dir / "heatmaps" / (curvature_name(v) + ".f32")), v});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedFile, (dir / "oracle.json").string() + ": " + e.what());
  }
  return data;
}

std::vector<Center3D> find_centers(const OracleData& data, std::span<const Camera> cameras,
                                   const HeatmapConfig& heatmap_config, const TriangulationConfig& config,
                                   int threads) {
  config.validate();
  TriangulationConfig per_class = config;
  per_class.expected_count.reset();
  std::vector<Center3D> all;
  for (std::size_t c = 0; c < data.class_ids.size(); ++c) {
    if (data.centers[c].size() != cameras.size()) {
      throw Error(ErrorCode::kShapeMismatch, "one center heatmap per camera is required");
    }
    std::vector<Center3D> found = detect_centers(data.centers[c], cameras, heatmap_config, per_class, threads);
    for (Center3D& f : found) f.class_id = data.class_ids[c];
    all.insert(all.end(), found.begin(), found.end());
  }
  return prune(std::move(all), config);
}

std::vector<DistanceMap> distance_maps(const OracleData& data, const CostConfig& config) {
  std::vector<DistanceMap> maps;
  for (const Heatmap& h : data.curvature) maps.push_back(distance_transform(h.values, config.binarize_threshold));
  return maps;
}

SolveResult solve(const Scene& scene, const OracleData& data, const SolveConfig& config,
                  std::vector<TraceRow>* trace) {
  if (data.curvature.size() != scene.cameras.size()) {
    throw Error(ErrorCode::kShapeMismatch, "heatmap views do not match the scene cameras");
  }
  SolveResult result;
  result.centers = find_centers(data, scene.cameras, config.heatmap, config.triangulation, config.optimizer.threads);
  if (result.centers.empty()) throw Error(ErrorCode::kEmptyScene, "no object centers found");
  SceneContext context;
  context.cameras = scene.cameras;
  context.maps = distance_maps(data, config.cost);
  context.cost = config.cost;
  for (const ObjectClass& c : scene.classes) context.meshes[c.id] = &c.mesh;
  result.estimate = optimize_scene(result.centers, context, config.optimizer, trace);
  return result;
}

std::pair<Scene, OracleData> generate_dataset(const SceneSpec& spec, const HeatmapConfig& config,
                                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Scene scene = generate_scene(spec, rng);
  OracleData data = make_oracle(scene, config, rng);
  return {std::move(scene), std::move(data)};
}

json centers_to_json(std::span<const Center3D> centers) {
  json list = json::array();
  for (const Center3D& c : centers) {
    list.push_back({{"class_id", c.class_id},
                    {"position_m", to_vector(c.position)},
                    {"per_view_scores", c.per_view_scores},
                    {"aggregate_score", c.aggregate_score}});
  }
  return {{"version", kFormatVersion}, {"centers", list}};
}

std::vector<Center3D> centers_from_json(const json& j) {
  check_version(j, "centers");
  std::vector<Center3D> out;
  try {
    for (const json& jc : j.at("centers")) {
      Center3D c;
      c.class_id = jc.at("class_id").get<int>();
      const auto p = jc.at("position_m").get<std::vector<double>>();
      if (p.size() != 3) throw Error(ErrorCode::kMalformedFile, "center position needs 3 values");
      c.position = Vec3(p[0], p[1], p[2]);
      c.per_view_scores = jc.at("per_view_scores").get<std::vector<double>>();
      c.aggregate_score = jc.at("aggregate_score").get<double>();
      out.push_back(std::move(c));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedFile, std::string("centers: ") + e.what());
  }
  return out;
}

json estimate_to_json(const SceneEstimate& estimate) {
  json list = json::array();
  for (const ObjectEstimate& o : estimate.objects) {
    const json pose = pose_to_json(o.pose);
    list.push_back({{"object_id", o.class_id},
                    {"rotation", pose.at("rotation")},
                    {"translation_m", pose.at("translation")},
                    {"cost", o.cost},
                    {"per_view_scores", o.per_view_scores},
                    {"aggregate_score", o.aggregate_score}});
  }
  return {{"version", kFormatVersion}, {"objects", list}};
}

SceneEstimate estimate_from_json(const json& j, const Scene& scene) {
  check_version(j, "estimates");
  SceneEstimate est;
  try {
    for (const json& jo : j.at("objects")) {
      ObjectEstimate o;
      o.class_id = jo.at("object_id").get<int>();
      o.mesh = &scene.class_by_id(o.class_id).mesh;
      o.pose = pose_from_json({{"rotation", jo.at("rotation")}, {"translation", jo.at("translation_m")}});
      o.cost = jo.value("cost", 0.0);
      o.per_view_scores = jo.value("per_view_scores", std::vector<double>{});
      o.aggregate_score = jo.value("aggregate_score", 0.0);
      est.objects.push_back(std::move(o));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedFile, std::string("estimates: ") + e.what());
  }
  return est;
}

std::string trace_to_csv(std::span<const TraceRow> rows) {
  std::string out = "object,stage,run,iteration,best_cost\n";
  char line[160];
  for (const TraceRow& r : rows) {
    std::snprintf(line, sizeof(line), "%d,%s,%d,%d,%.17g\n", r.object, r.stage.c_str(), r.run, r.iteration,
                  r.best_cost);
    out += line;
  }
  return out;
}

}  // namespace curvpose
