#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "curvpose/centers.h"
#include "curvpose/costfn.h"
#include "curvpose/geometry.h"
#include "curvpose/mesh.h"

namespace curvpose {

// Translation offset of the bounding-box center from the anchor (m, 3) followed
// by an axis-angle rotation (rad, 3).
using PoseParams = Eigen::Matrix<double, 6, 1>;

struct OptimizerConfig {
  int n_candidates = 2000;
  int n_refine = 4;
  std::optional<double> translation_sigma;  // default 0.05 * diameter
  std::optional<double> translation_bound;  // default 0.5 * diameter
  int simplex_max_iters = 400;
  double simplex_xtol = 1e-4;
  double simplex_ftol = 1e-4;
  double simplex_translation_step = 0.05;  // fraction of the diameter
  double simplex_rotation_step = 0.1;      // rad
  std::uint64_t rng_seed = 0;
  int threads = 0;

  void validate() const;
  double sigma_for(const Mesh& mesh) const;
  double bound_for(const Mesh& mesh) const;
};

// Pose whose bounding-box center sits at anchor + params[0:3].
Pose pose_from_params(const PoseParams& params, const Vec3& anchor, const Mesh& mesh);

// Draw order per candidate: three uniforms (rotation), then three normals
// (translation x, y, z).
std::vector<PoseParams> sample_candidates(const Center3D& center, const Mesh& mesh, const OptimizerConfig& config,
                                          std::mt19937_64& rng);

struct ObjectEstimate {
  int class_id = 0;
  const Mesh* mesh = nullptr;
  Pose pose;
  double cost = 0.0;
  std::vector<double> per_view_scores;
  double aggregate_score = 0.0;
};

struct SceneEstimate {
  std::vector<ObjectEstimate> objects;  // placement order
};

struct SceneContext {
  std::vector<Camera> cameras;
  std::vector<DistanceMap> maps;  // one per camera
  CostConfig cost;
  std::map<int, const Mesh*> meshes;  // class id -> mesh

  const Mesh& mesh_for(int class_id) const;
};

struct TraceRow {
  int object = 0;
  std::string stage;  // "candidates" or "simplex"
  int run = 0;
  int iteration = 0;
  double best_cost = 0.0;
};

struct ObjectResult {
  Pose pose;
  double cost = 0.0;
  double best_candidate_cost = 0.0;
};

// View weights are the center's per-view scores normalized to sum 1 (uniform if
// all are zero). extra_candidates are scored alongside the random ones.
ObjectResult optimize_object(const Center3D& center, const SceneEstimate& placed, const SceneContext& context,
                             const OptimizerConfig& config, std::mt19937_64& rng,
                             std::span<const Pose> extra_candidates = {}, std::vector<TraceRow>* trace = nullptr,
                             int object_index = 0);

// Objects are placed by descending aggregate score; the RNG is seeded once from
// config.rng_seed. Throws kEmptyScene for no centers.
SceneEstimate optimize_scene(std::span<const Center3D> centers, const SceneContext& context,
                             const OptimizerConfig& config, std::vector<TraceRow>* trace = nullptr);

std::vector<double> view_weights_from_scores(std::span<const double> scores, std::size_t views);

}  // namespace curvpose
