#include "curvpose/optimizer.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "curvpose/errors.h"
#include "curvpose/parallel.h"
#include "curvpose/scene_io.h"
#include "curvpose/simplex.h"

namespace curvpose {

void OptimizerConfig::validate() const {
  if (n_refine < 1 || n_candidates < n_refine) {
    throw Error(ErrorCode::kInvalidArgument, "need n_candidates >= n_refine >= 1");
  }
  if (translation_sigma && !(*translation_sigma >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "translation_sigma must be >= 0");
  }
  if (translation_bound && !(*translation_bound > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "translation_bound must be > 0");
  }
  if (simplex_max_iters < 0 || !(simplex_xtol >= 0.0) || !(simplex_ftol >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid simplex settings");
  }
  if (!(simplex_translation_step > 0.0) || !(simplex_rotation_step > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "simplex steps must be > 0");
  }
}

double OptimizerConfig::sigma_for(const Mesh& mesh) const {
  return translation_sigma.value_or(0.05 * mesh.diameter);
}

double OptimizerConfig::bound_for(const Mesh& mesh) const {
  return translation_bound.value_or(0.5 * mesh.diameter);
}

const Mesh& SceneContext::mesh_for(int class_id) const {
  const auto it = meshes.find(class_id);
  if (it == meshes.end() || it->second == nullptr) {
    throw Error(ErrorCode::kValidationError, "no mesh for class id " + std::to_string(class_id));
  }
  return *it->second;
}

Pose pose_from_params(const PoseParams& params, const Vec3& anchor, const Mesh& mesh) {
  const Mat3 r = rotation_from_axis_angle(params.tail<3>());
  const Vec3 position = anchor + params.head<3>();
  return Pose(r, position - r * mesh.bbox_center);
}

std::vector<PoseParams> sample_candidates(const Center3D& center, const Mesh& mesh, const OptimizerConfig& config,
                                          std::mt19937_64& rng) {
  (void)center;
  config.validate();
  const double sigma = config.sigma_for(mesh);
  const double bound = config.bound_for(mesh);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<PoseParams> out(static_cast<std::size_t>(config.n_candidates));
  for (PoseParams& p : out) {
    const double u1 = unit(rng), u2 = unit(rng), u3 = unit(rng);
    p.tail<3>() = axis_angle_from_rotation(uniform_rotation(u1, u2, u3));
    for (int i = 0; i < 3; ++i) p[i] = std::clamp(sigma * normal(rng), -bound, bound);
  }
  return out;
}

std::vector<double> view_weights_from_scores(std::span<const double> scores, std::size_t views) {
  std::vector<double> w(views, 1.0 / static_cast<double>(views));
  if (scores.size() != views) return w;
  double total = 0.0;
  for (double s : scores) total += std::max(0.0, s);
  if (!(total > 0.0)) return w;
  for (std::size_t v = 0; v < views; ++v) w[v] = std::max(0.0, scores[v]) / total;
  return w;
}

ObjectResult optimize_object(const Center3D& center, const SceneEstimate& placed, const SceneContext& context,
                             const OptimizerConfig& config, std::mt19937_64& rng,
                             std::span<const Pose> extra_candidates, std::vector<TraceRow>* trace,
                             int object_index) {
  config.validate();
  const Mesh& mesh = context.mesh_for(center.class_id);
  PoseSet fixed;
  for (const ObjectEstimate& o : placed.objects) fixed.push_back({o.mesh, o.pose});

  CostConfig cost = context.cost;
  cost.view_weights = view_weights_from_scores(center.per_view_scores, context.cameras.size());
  const IncrementalCost scorer(context.cameras, context.maps, cost, std::move(fixed), config.threads);

  const std::vector<PoseParams> params = sample_candidates(center, mesh, config, rng);
  std::vector<PlacedMesh> candidates;
  candidates.reserve(params.size() + extra_candidates.size());
  for (const PoseParams& p : params) candidates.push_back({&mesh, pose_from_params(p, center.position, mesh)});
  for (const Pose& p : extra_candidates) candidates.push_back({&mesh, p});
  const std::vector<double> costs = scorer.batch(candidates);

  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return costs[a] < costs[b]; });
  const std::size_t n_refine = std::min<std::size_t>(config.n_refine, order.size());
  if (trace) trace->push_back({object_index, "candidates", 0, 0, costs[order[0]]});

  const double bound = config.bound_for(mesh);
  std::vector<NelderMeadResult> results(n_refine);
  std::vector<Pose> refined(n_refine);
  std::vector<std::vector<TraceRow>> run_traces(n_refine);
  const int workers = static_cast<int>(std::min<std::size_t>(scorer.threads(), n_refine));
  std::vector<IncrementalCost::Scratch> scratch;
  for (int k = 0; k < workers; ++k) scratch.push_back(scorer.make_scratch());

  parallel_for(n_refine, workers, [&](std::size_t run, int worker) {
    const Pose& start = candidates[order[run]].pose;
    // Re-center the rotation chart on the start rotation: x = (dt, delta) maps to
    // rotation exp(delta) * R_start and bbox center start_center + dt.
    const Mat3 r0 = start.rotation();
    const Vec3 c0 = start.apply(mesh.bbox_center);
    const Vec3 offset0 = c0 - center.position;
    auto make_pose = [&](const Eigen::VectorXd& x) {
      const Mat3 r = rotation_from_axis_angle(x.tail<3>()) * r0;
      return Pose(r, c0 + x.head<3>() - r * mesh.bbox_center);
    };
    NelderMeadOptions opts;
    opts.max_iters = config.simplex_max_iters;
    opts.xtol = config.simplex_xtol;
    opts.ftol = config.simplex_ftol;
    opts.initial_step.resize(6);
    opts.lower.resize(6);
    opts.upper.resize(6);
    for (int i = 0; i < 3; ++i) {
      opts.initial_step[i] = config.simplex_translation_step * mesh.diameter;
      opts.lower[i] = -bound - offset0[i];
      opts.upper[i] = bound - offset0[i];
      opts.initial_step[3 + i] = config.simplex_rotation_step;
      opts.lower[3 + i] = -M_PI;
      opts.upper[3 + i] = M_PI;
    }
    // A start outside the box (seeded extra candidates) widens the box to hold it.
    for (int i = 0; i < 3; ++i) {
      opts.lower[i] = std::min(opts.lower[i], 0.0);
      opts.upper[i] = std::max(opts.upper[i], 0.0);
    }
    IncrementalCost::Scratch& s = scratch[static_cast<std::size_t>(worker)];
    const auto objective = [&](const Eigen::VectorXd& x) { return scorer.evaluate({&mesh, make_pose(x)}, s); };
    IterationCallback cb;
    if (trace) {
      cb = [&, run](int iteration, double best) {
        run_traces[run].push_back({object_index, "simplex", static_cast<int>(run), iteration, best});
      };
    }
    results[run] = nelder_mead(objective, Eigen::VectorXd::Zero(6), opts, cb);
    refined[run] = make_pose(results[run].x);
  });

  std::size_t best = 0;
  for (std::size_t k = 1; k < n_refine; ++k) {
    if (results[k].value < results[best].value) best = k;
  }
  if (trace) {
    for (auto& rows : run_traces) trace->insert(trace->end(), rows.begin(), rows.end());
  }
  ObjectResult out;
  out.pose = refined[best];
  out.cost = results[best].value;
  out.best_candidate_cost = costs[order[0]];
  return out;
}

SceneEstimate optimize_scene(std::span<const Center3D> centers, const SceneContext& context,
                             const OptimizerConfig& config, std::vector<TraceRow>* trace) {
  if (centers.empty()) throw Error(ErrorCode::kEmptyScene, "no centers to optimize");
  config.validate();
  std::vector<std::size_t> order(centers.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return centers[a].aggregate_score > centers[b].aggregate_score;
  });
  std::mt19937_64 rng(config.rng_seed);
  SceneEstimate estimate;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const Center3D& c = centers[order[k]];
    const ObjectResult r = optimize_object(c, estimate, context, config, rng, {}, trace, static_cast<int>(k));
    ObjectEstimate o;
    o.class_id = c.class_id;
    o.mesh = &context.mesh_for(c.class_id);
    o.pose = r.pose;
    o.cost = r.cost;
    o.per_view_scores = c.per_view_scores;
    o.aggregate_score = c.aggregate_score;
    estimate.objects.push_back(std::move(o));
  }
  return estimate;
}

}  // namespace curvpose
