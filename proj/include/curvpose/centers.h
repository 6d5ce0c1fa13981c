#pragma once

#include <optional>
#include <span>
#include <vector>

#include "curvpose/geometry.h"
#include "curvpose/heatmaps.h"

namespace curvpose {

struct TriangulationConfig {
  double d_t = 0.03;  // max ray-pair gap for a midpoint to become a candidate (m)
  double d_c = 0.03;  // candidate merge radius (m); also the refinement box half-width
  double d_o = 0.03;  // overlap pruning radius (m)
  std::optional<int> expected_count;
  // A center needs a reprojection score >= support_score in at least min_views
  // views (capped at the view count); this drops ghost intersections of rays
  // from different objects.
  int min_views = 4;
  double support_score = 0.3;

  // Simplex settings for the reprojection-score refinement.
  double refine_step = 0.005;
  int refine_max_iters = 400;
  double refine_xtol = 1e-6;
  double refine_ftol = 1e-9;

  void validate() const;
};

struct Center3D {
  Vec3 position = Vec3::Zero();
  std::vector<double> per_view_scores;  // heatmap value at the reprojection, per view
  double aggregate_score = 0.0;         // sum of per_view_scores
  int class_id = 0;
};

// Midpoints of every cross-view peak pair whose rays pass within d_t. Views are
// paired in index order (a < b), then peaks in list order. Throws
// kInsufficientViews for fewer than two views.
std::vector<Vec3> triangulate_candidates(std::span<const std::vector<Peak>> peaks_per_view,
                                         std::span<const Camera> cameras, const TriangulationConfig& config);

// Greedy agglomeration: repeatedly merges the closest pair of clusters whose
// centroids are closer than d_c. Ordered by descending cluster size, then
// lexicographic position.
std::vector<Vec3> merge_candidates(std::span<const Vec3> points, double d_c);

// Heatmap values (bilinear) at the point's projection in each view; 0 when the
// point is behind a camera or projects outside the image.
std::vector<double> reprojection_scores(const Vec3& point, std::span<const Heatmap> heatmaps,
                                        std::span<const Camera> cameras);

// Maximizes the summed reprojection score of each point with a bounded simplex
// restricted to a box of half-width d_c around the start point.
std::vector<Center3D> refine_and_score(std::span<const Vec3> points, std::span<const Heatmap> heatmaps,
                                       std::span<const Camera> cameras, const TriangulationConfig& config,
                                       int threads = 1);

// Drops centers without min_views support (capped at the view count), keeps a
// center only if it is at least d_o away from every higher-scoring kept center,
// then truncates to expected_count when set.
std::vector<Center3D> prune(std::vector<Center3D> centers, const TriangulationConfig& config);

// Peaks -> candidates -> merge -> refine -> prune for one heatmap channel.
std::vector<Center3D> detect_centers(std::span<const Heatmap> heatmaps, std::span<const Camera> cameras,
                                     const HeatmapConfig& heatmap_config,
                                     const TriangulationConfig& config, int threads = 1);

}  // namespace curvpose
