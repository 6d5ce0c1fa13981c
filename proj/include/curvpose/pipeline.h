#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include <json.hpp>

#include "curvpose/centers.h"
#include "curvpose/costfn.h"
#include "curvpose/heatmaps.h"
#include "curvpose/metrics.h"
#include "curvpose/optimizer.h"
#include "curvpose/scene_io.h"

namespace curvpose {

// Stand-in for the network output: one center channel per class and one
// curvature map, per view.
struct OracleData {
  std::vector<int> class_ids;
  std::vector<std::vector<Heatmap>> centers;  // [class][view]
  std::vector<Heatmap> curvature;             // [view]
  double noise_sigma = 0.0;
};

// Noise seeds are drawn from `rng` in order: center maps (class-major, then
// view), then curvature maps per view.
OracleData make_oracle(const Scene& scene, const HeatmapConfig& config, std::mt19937_64& rng);

// Layout under dir: oracle.json, heatmaps/center_c<class>_v<view>.f32,
// heatmaps/curvature_v<view>.f32, plus 16-bit PNG previews when `png`.
void save_oracle(const OracleData& data, const std::filesystem::path& dir, bool png = true);
OracleData load_oracle(const std::filesystem::path& dir);

// Detects centers per class channel, then prunes across classes with d_o and
// truncates to expected_count.
std::vector<Center3D> find_centers(const OracleData& data, std::span<const Camera> cameras,
                                   const HeatmapConfig& heatmap_config, const TriangulationConfig& config,
                                   int threads = 1);

std::vector<DistanceMap> distance_maps(const OracleData& data, const CostConfig& config);

struct SolveConfig {
  HeatmapConfig heatmap;
  TriangulationConfig triangulation;
  CostConfig cost;
  OptimizerConfig optimizer;
};

struct SolveResult {
  std::vector<Center3D> centers;
  SceneEstimate estimate;
};

// Centers, then sequential pose optimization. `scene` supplies cameras and
// meshes only; its instances are never read.
SolveResult solve(const Scene& scene, const OracleData& data, const SolveConfig& config,
                  std::vector<TraceRow>* trace = nullptr);

// Generates a scene from spec and seed, then its oracle data, from one RNG.
std::pair<Scene, OracleData> generate_dataset(const SceneSpec& spec, const HeatmapConfig& config,
                                              std::uint64_t seed);

nlohmann::json centers_to_json(std::span<const Center3D> centers);
std::vector<Center3D> centers_from_json(const nlohmann::json& j);
nlohmann::json estimate_to_json(const SceneEstimate& estimate);
// Mesh pointers refer into scene.classes.
SceneEstimate estimate_from_json(const nlohmann::json& j, const Scene& scene);

std::string trace_to_csv(std::span<const TraceRow> rows);

}  // namespace curvpose
