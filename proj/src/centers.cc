#include "curvpose/centers.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "curvpose/errors.h"
#include "curvpose/parallel.h"
#include "curvpose/simplex.h"

namespace curvpose {
namespace {

bool lex_less(const Vec3& a, const Vec3& b) {
  return std::lexicographical_compare(a.data(), a.data() + 3, b.data(), b.data() + 3);
}

}  // namespace

void TriangulationConfig::validate() const {
  if (!(d_t > 0.0 && d_c > 0.0 && d_o > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "d_t, d_c and d_o must be positive");
  }
  if (expected_count && *expected_count < 0) {
    throw Error(ErrorCode::kInvalidArgument, "expected_count must be non-negative");
  }
  if (min_views < 0) throw Error(ErrorCode::kInvalidArgument, "min_views must be non-negative");
}

std::vector<Vec3> triangulate_candidates(std::span<const std::vector<Peak>> peaks_per_view,
                                         std::span<const Camera> cameras, const TriangulationConfig& config) {
  config.validate();
  if (peaks_per_view.size() < 2 || cameras.size() < 2) {
    throw Error(ErrorCode::kInsufficientViews, "triangulation needs at least two views");
  }
  if (peaks_per_view.size() != cameras.size()) {
    throw Error(ErrorCode::kShapeMismatch, "one peak list per camera is required");
  }
  std::vector<std::vector<Ray>> rays(cameras.size());
  for (std::size_t v = 0; v < cameras.size(); ++v) {
    for (const Peak& p : peaks_per_view[v]) rays[v].push_back(pixel_ray(cameras[v], p.pixel));
  }
  std::vector<Vec3> out;
  for (std::size_t a = 0; a < rays.size(); ++a) {
    for (std::size_t b = a + 1; b < rays.size(); ++b) {
      for (const Ray& ra : rays[a]) {
        for (const Ray& rb : rays[b]) {
          try {
            const RayPairMidpoint m = ray_pair_midpoint(ra, rb);
            if (m.gap < config.d_t) out.push_back(m.midpoint);
          } catch (const Error& e) {
            if (e.code() != ErrorCode::kParallel) throw;
          }
        }
      }
    }
  }
  return out;
}

std::vector<Vec3> merge_candidates(std::span<const Vec3> points, double d_c) {
  struct Cluster {
    Vec3 sum;
    int count;
    Vec3 centroid() const { return sum / count; }
  };
  std::vector<Cluster> clusters;
  clusters.reserve(points.size());
  for (const Vec3& p : points) clusters.push_back({p, 1});

  while (clusters.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      const Vec3 ci = clusters[i].centroid();
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        const double d = (ci - clusters[j].centroid()).norm();
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    }
    if (!(best < d_c)) break;
    clusters[bi].sum += clusters[bj].sum;
    clusters[bi].count += clusters[bj].count;
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
  }

  std::stable_sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
    if (a.count != b.count) return a.count > b.count;
    return lex_less(a.centroid(), b.centroid());
  });
  std::vector<Vec3> out;
  out.reserve(clusters.size());
  for (const Cluster& c : clusters) out.push_back(c.centroid());
  return out;
}

std::vector<double> reprojection_scores(const Vec3& point, std::span<const Heatmap> heatmaps,
                                        std::span<const Camera> cameras) {
  std::vector<double> scores(cameras.size(), 0.0);
  for (std::size_t v = 0; v < cameras.size(); ++v) {
    const Camera& cam = cameras[v];
    if (!(cam.to_camera(point).z() > 0.0)) continue;
    const Vec2 px = project(cam, point);
    if (!cam.contains(px)) continue;
    scores[v] = sample_bilinear(heatmaps[v].values, px);
  }
  return scores;
}

std::vector<Center3D> refine_and_score(std::span<const Vec3> points, std::span<const Heatmap> heatmaps,
                                       std::span<const Camera> cameras, const TriangulationConfig& config,
                                       int threads) {
  config.validate();
  if (heatmaps.size() != cameras.size()) {
    throw Error(ErrorCode::kShapeMismatch, "one heatmap per camera is required");
  }
  std::vector<Center3D> out(points.size());
  parallel_for(points.size(), threads, [&](std::size_t k, int) {
    const Vec3& start = points[k];
    auto objective = [&](const Eigen::VectorXd& x) {
      const std::vector<double> s = reprojection_scores(Vec3(x[0], x[1], x[2]), heatmaps, cameras);
      double total = 0.0;
      for (double v : s) total += v;
      return -total;
    };
    NelderMeadOptions opt;
    opt.max_iters = config.refine_max_iters;
    opt.xtol = config.refine_xtol;
    opt.ftol = config.refine_ftol;
    opt.initial_step = Eigen::VectorXd::Constant(3, std::min(config.refine_step, config.d_c));
    opt.lower = start - Vec3::Constant(config.d_c);
    opt.upper = start + Vec3::Constant(config.d_c);
    const NelderMeadResult r = nelder_mead(objective, Eigen::VectorXd(start), opt);

    Center3D c;
    c.position = Vec3(r.x[0], r.x[1], r.x[2]);
    c.per_view_scores = reprojection_scores(c.position, heatmaps, cameras);
    for (double v : c.per_view_scores) c.aggregate_score += v;
    out[k] = std::move(c);
  });
  return out;
}

std::vector<Center3D> prune(std::vector<Center3D> centers, const TriangulationConfig& config) {
  config.validate();
  std::erase_if(centers, [&](const Center3D& c) {
    const auto support = std::count_if(c.per_view_scores.begin(), c.per_view_scores.end(),
                                       [&](double s) { return s >= config.support_score; });
    const auto required = std::min<std::ptrdiff_t>(config.min_views, std::ssize(c.per_view_scores));
    return support < required;
  });
  std::stable_sort(centers.begin(), centers.end(), [](const Center3D& a, const Center3D& b) {
    if (a.aggregate_score != b.aggregate_score) return a.aggregate_score > b.aggregate_score;
    return lex_less(a.position, b.position);
  });
  std::vector<Center3D> kept;
  for (Center3D& c : centers) {
    const bool clear = std::all_of(kept.begin(), kept.end(), [&](const Center3D& k) {
      return (k.position - c.position).norm() >= config.d_o;
    });
    if (clear) kept.push_back(std::move(c));
  }
  if (config.expected_count && kept.size() > static_cast<std::size_t>(*config.expected_count)) {
    kept.resize(static_cast<std::size_t>(*config.expected_count));
  }
  return kept;
}

std::vector<Center3D> detect_centers(std::span<const Heatmap> heatmaps, std::span<const Camera> cameras,
                                     const HeatmapConfig& heatmap_config,
                                     const TriangulationConfig& config, int threads) {
  std::vector<std::vector<Peak>> peaks;
  peaks.reserve(heatmaps.size());
  for (const Heatmap& h : heatmaps) peaks.push_back(detect_peaks(h, heatmap_config));
  const std::vector<Vec3> candidates = triangulate_candidates(peaks, cameras, config);
  const std::vector<Vec3> merged = merge_candidates(candidates, config.d_c);
  return prune(refine_and_score(merged, heatmaps, cameras, config, threads), config);
}

}  // namespace curvpose
