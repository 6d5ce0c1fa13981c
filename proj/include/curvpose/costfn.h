#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "curvpose/geometry.h"
#include "curvpose/image.h"
#include "curvpose/renderer.h"

namespace curvpose {

// Euclidean distance (pixels) to the nearest pixel whose target value was >= t_b.
struct DistanceMap {
  ImageF distances;
  double threshold = 0.0;
};

// Exact Euclidean distance transform (separable lower-envelope algorithm). An
// image without true pixels maps to the image diagonal everywhere.
DistanceMap distance_transform(const ImageF& target, double t_b);

struct CostConfig {
  double binarize_threshold = 0.1;  // t_b
  std::vector<double> view_weights; // empty means uniform
  std::optional<double> empty_render_penalty;  // default: largest image diagonal

  void validate(std::size_t views) const;
  double weight(std::size_t view) const;
  double penalty(std::span<const DistanceMap> maps) const;
};

struct ViewSums {
  double weighted = 0.0;  // sum over pixels of curvature * distance
  double mass = 0.0;      // sum over pixels of curvature
};

// Sums of one curvature map against one distance map. Rows are reduced with
// simd::weighted_sum and accumulated top to bottom, which fixes the rounding.
ViewSums view_sums(const ImageF& curvature, const DistanceMap& map);

// Per view c_v = weighted / mass (or the empty-render penalty when mass == 0);
// result sum_v w_v c_v / sum_v w_v. Throws kShapeMismatch on size mismatch.
double combine_view_sums(std::span<const ViewSums> sums, std::span<const DistanceMap> maps,
                         const CostConfig& config);
double scene_cost(const RenderedViews& renders, std::span<const DistanceMap> maps, const CostConfig& config);

using PoseSet = std::vector<PlacedMesh>;

// Full render-and-compare cost of each pose set; element i equals
// scene_cost(render_curvature(candidates[i], cameras), ...). Candidates are
// evaluated in parallel with results independent of thread count.
std::vector<double> batch_cost(std::span<const PoseSet> candidates, std::span<const Camera> cameras,
                               std::span<const DistanceMap> maps, const CostConfig& config, int threads = 0);

// Cost of "fixed objects + one candidate" pose sets, bit-identical to
// batch_cost on the same pose sets (candidate drawn last). The fixed objects are
// rendered once; each evaluation only re-rasterizes the candidate and recomputes
// curvature inside its footprint.
class IncrementalCost {
 public:
  IncrementalCost(std::vector<Camera> cameras, std::span<const DistanceMap> maps, CostConfig config,
                  PoseSet fixed, int threads = 0);

  struct Scratch {
    std::vector<ViewRender> views;
    std::vector<float> row;
    std::vector<ViewSums> sums;
  };

  Scratch make_scratch() const;
  double evaluate(const PlacedMesh& candidate, Scratch& scratch) const;
  double evaluate(const PlacedMesh& candidate) const;
  std::vector<double> batch(std::span<const PlacedMesh> candidates) const;

  int threads() const { return threads_; }
  const CostConfig& config() const { return config_; }
  void set_view_weights(std::vector<double> weights);

 private:
  std::vector<Camera> cameras_;
  std::span<const DistanceMap> maps_;
  CostConfig config_;
  PoseSet fixed_;
  int threads_;
  std::vector<ViewRender> background_;
  std::vector<ImageF> background_curvature_;
  std::vector<std::vector<ViewSums>> background_rows_;  // per view, per row
};

}  // namespace curvpose
