#include "curvpose/costfn.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "curvpose/errors.h"
#include "curvpose/parallel.h"
#include "curvpose/simd/kernels.h"

namespace curvpose {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One-dimensional squared-distance transform over the lower envelope of the
// parabolas rooted at finite samples of f. `v` and `z` are scratch buffers of
// size n and n + 1.
void squared_dt_1d(const double* f, int n, std::ptrdiff_t f_stride, double* d, std::ptrdiff_t d_stride,
                   std::vector<int>& v, std::vector<double>& z) {
  int k = -1;
  for (int q = 0; q < n; ++q) {
    const double fq = f[q * f_stride];
    if (fq == kInf) continue;
    const double hq = fq + static_cast<double>(q) * q;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    // z[0] == -inf stops the loop before k drops below zero.
    auto intersect = [&](int p) {
      const double hp = f[p * f_stride] + static_cast<double>(p) * p;
      return (hq - hp) / (2.0 * (q - p));
    };
    double s = intersect(v[k]);
    while (s <= z[k]) {
      --k;
      s = intersect(v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (k < 0) {
    for (int q = 0; q < n; ++q) d[q * d_stride] = kInf;
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double dq = static_cast<double>(q - v[j]);
    d[q * d_stride] = dq * dq + f[v[j] * f_stride];
  }
}

}  // namespace

DistanceMap distance_transform(const ImageF& target, double t_b) {
  if (!(t_b > 0.0)) throw Error(ErrorCode::kInvalidArgument, "binarization threshold must be > 0");
  const int w = target.width();
  const int h = target.height();
  DistanceMap out{ImageF(w, h, 0.0f), t_b};
  if (w == 0 || h == 0) return out;

  std::vector<double> f(static_cast<std::size_t>(w) * h);
  bool any = false;
  const float thr = static_cast<float>(t_b);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const bool on = target(r, c) >= thr;
      any = any || on;
      f[static_cast<std::size_t>(r) * w + c] = on ? 0.0 : kInf;
    }
  }
  if (!any) {
    out.distances.fill(static_cast<float>(std::sqrt(static_cast<double>(w) * w + static_cast<double>(h) * h)));
    return out;
  }

  const int n = std::max(w, h);
  std::vector<int> v(n);
  std::vector<double> z(n + 1);
  std::vector<double> g(f.size());
  for (int c = 0; c < w; ++c) squared_dt_1d(f.data() + c, h, w, g.data() + c, w, v, z);
  std::vector<double> d(f.size());
  for (int r = 0; r < h; ++r) {
    squared_dt_1d(g.data() + static_cast<std::size_t>(r) * w, w, 1, d.data() + static_cast<std::size_t>(r) * w, 1,
                  v, z);
  }
  auto px = out.distances.pixels();
  for (std::size_t k = 0; k < d.size(); ++k) px[k] = static_cast<float>(std::sqrt(d[k]));
  return out;
}

void CostConfig::validate(std::size_t views) const {
  if (!(binarize_threshold > 0.0)) throw Error(ErrorCode::kInvalidArgument, "t_b must be > 0");
  if (!view_weights.empty()) {
    if (view_weights.size() != views) {
      throw Error(ErrorCode::kShapeMismatch, "one view weight per view is required");
    }
    bool positive = false;
    for (double w : view_weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorCode::kInvalidArgument, "view weights must be >= 0");
      positive = positive || w > 0.0;
    }
    if (!positive) throw Error(ErrorCode::kInvalidArgument, "at least one view weight must be positive");
  }
}

double CostConfig::weight(std::size_t view) const {
  return view_weights.empty() ? 1.0 : view_weights[view];
}

double CostConfig::penalty(std::span<const DistanceMap> maps) const {
  if (empty_render_penalty) return *empty_render_penalty;
  double diag = 0.0;
  for (const DistanceMap& m : maps) {
    const double w = m.distances.width();
    const double h = m.distances.height();
    diag = std::max(diag, std::sqrt(w * w + h * h));
  }
  return diag;
}

ViewSums view_sums(const ImageF& curvature, const DistanceMap& map) {
  if (!curvature.same_shape(map.distances)) {
    throw Error(ErrorCode::kShapeMismatch, "render and distance map sizes differ");
  }
  ViewSums total;
  const std::size_t w = static_cast<std::size_t>(curvature.width());
  for (int r = 0; r < curvature.height(); ++r) {
    const simd::WeightedSum s = simd::weighted_sum(curvature.row(r), map.distances.row(r), w);
    total.weighted += s.weighted;
    total.mass += s.mass;
  }
  return total;
}

double combine_view_sums(std::span<const ViewSums> sums, std::span<const DistanceMap> maps,
                         const CostConfig& config) {
  if (sums.size() != maps.size()) throw Error(ErrorCode::kShapeMismatch, "view count mismatch");
  config.validate(maps.size());
  const double penalty = config.penalty(maps);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t v = 0; v < sums.size(); ++v) {
    const double w = config.weight(v);
    if (w == 0.0) continue;
    const double c = sums[v].mass > 0.0 ? sums[v].weighted / sums[v].mass : penalty;
    num += w * c;
    den += w;
  }
  return num / den;
}

double scene_cost(const RenderedViews& renders, std::span<const DistanceMap> maps, const CostConfig& config) {
  if (renders.curvature.size() != maps.size()) {
    throw Error(ErrorCode::kShapeMismatch, "one distance map per rendered view is required");
  }
  config.validate(maps.size());
  std::vector<ViewSums> sums(maps.size());
  for (std::size_t v = 0; v < maps.size(); ++v) {
    if (config.weight(v) == 0.0) {
      if (!renders.curvature[v].same_shape(maps[v].distances)) {
        throw Error(ErrorCode::kShapeMismatch, "render and distance map sizes differ");
      }
      continue;
    }
    sums[v] = view_sums(renders.curvature[v], maps[v]);
  }
  return combine_view_sums(sums, maps, config);
}

std::vector<double> batch_cost(std::span<const PoseSet> candidates, std::span<const Camera> cameras,
                               std::span<const DistanceMap> maps, const CostConfig& config, int threads) {
  if (cameras.size() != maps.size()) throw Error(ErrorCode::kShapeMismatch, "one distance map per camera");
  config.validate(maps.size());
  for (std::size_t v = 0; v < cameras.size(); ++v) {
    if (cameras[v].width != maps[v].distances.width() || cameras[v].height != maps[v].distances.height()) {
      throw Error(ErrorCode::kShapeMismatch, "camera and distance map sizes differ");
    }
  }
  std::vector<double> out(candidates.size(), 0.0);
  const int workers = static_cast<int>(
      std::min<std::size_t>(resolve_thread_count(threads), std::max<std::size_t>(1, candidates.size())));

  // Per-worker buffers, reset by box after each candidate. Rows outside the
  // drawn region hold zero curvature and add exactly nothing to the sums.
  struct Buffers {
    std::vector<ViewRender> views;
    std::vector<float> row;
    std::vector<ViewSums> sums;
  };
  std::vector<ViewRender> blank;
  int max_w = 0;
  for (const Camera& c : cameras) {
    blank.push_back(make_empty_view(c));
    max_w = std::max(max_w, c.width);
  }
  std::vector<Buffers> buffers(static_cast<std::size_t>(workers));
  for (Buffers& b : buffers) {
    b.views = blank;
    b.row.assign(static_cast<std::size_t>(max_w), 0.0f);
    b.sums.resize(cameras.size());
  }

  parallel_for(candidates.size(), workers, [&](std::size_t i, int worker) {
    Buffers& b = buffers[static_cast<std::size_t>(worker)];
    for (std::size_t v = 0; v < cameras.size(); ++v) {
      b.sums[v] = {};
      if (config.weight(v) == 0.0) continue;
      const Camera& cam = cameras[v];
      ViewRender& view = b.views[v];
      PixelBox touched;
      for (std::size_t k = 0; k < candidates[i].size(); ++k) {
        const PixelBox box = draw_object(candidates[i][k], static_cast<std::int32_t>(k), cam, view);
        if (box.empty()) continue;
        touched.include(box.x0, box.y0);
        touched.include(box.x1 - 1, box.y1 - 1);
      }
      const PixelBox region = touched.dilated(1, cam.width, cam.height);
      const std::size_t w = static_cast<std::size_t>(cam.width);
      float* row = b.row.data();
      std::fill(row, row + w, 0.0f);
      ViewSums total;
      for (int r = region.y0; r < region.y1; ++r) {
        curvature_row(view.normals, r, region.x0, region.x1, row + region.x0);
        const simd::WeightedSum s = simd::weighted_sum(row, maps[v].distances.row(r), w);
        total.weighted += s.weighted;
        total.mass += s.mass;
      }
      std::fill(row + region.x0, row + region.x1, 0.0f);
      b.sums[v] = total;
      view.copy_box(blank[v], touched);
    }
    out[i] = combine_view_sums(b.sums, maps, config);
  });
  return out;
}

IncrementalCost::IncrementalCost(std::vector<Camera> cameras, std::span<const DistanceMap> maps,
                                 CostConfig config, PoseSet fixed, int threads)
    : cameras_(std::move(cameras)), maps_(maps), config_(std::move(config)), fixed_(std::move(fixed)),
      threads_(resolve_thread_count(threads)) {
  if (cameras_.size() != maps_.size()) throw Error(ErrorCode::kShapeMismatch, "one distance map per camera");
  config_.validate(maps_.size());
  for (std::size_t v = 0; v < cameras_.size(); ++v) {
    if (cameras_[v].width != maps_[v].distances.width() || cameras_[v].height != maps_[v].distances.height()) {
      throw Error(ErrorCode::kShapeMismatch, "camera and distance map sizes differ");
    }
  }
  background_.resize(cameras_.size());
  background_curvature_.resize(cameras_.size());
  background_rows_.resize(cameras_.size());
  parallel_for(cameras_.size(), threads_, [&](std::size_t v, int) {
    background_[v] = rasterize(fixed_, cameras_[v]);
    background_curvature_[v] = curvature_from_normals(background_[v].normals);
    const ImageF& curv = background_curvature_[v];
    auto& rows = background_rows_[v];
    rows.resize(curv.height());
    for (int r = 0; r < curv.height(); ++r) {
      const simd::WeightedSum s =
          simd::weighted_sum(curv.row(r), maps_[v].distances.row(r), static_cast<std::size_t>(curv.width()));
      rows[r] = {s.weighted, s.mass};
    }
  });
}

void IncrementalCost::set_view_weights(std::vector<double> weights) {
  CostConfig c = config_;
  c.view_weights = std::move(weights);
  c.validate(maps_.size());
  config_ = std::move(c);
}

IncrementalCost::Scratch IncrementalCost::make_scratch() const {
  Scratch s;
  s.views = background_;
  int max_w = 0;
  for (const Camera& c : cameras_) max_w = std::max(max_w, c.width);
  s.row.assign(static_cast<std::size_t>(max_w), 0.0f);
  s.sums.resize(cameras_.size());
  return s;
}

double IncrementalCost::evaluate(const PlacedMesh& candidate, Scratch& scratch) const {
  const std::int32_t index = static_cast<std::int32_t>(fixed_.size());
  for (std::size_t v = 0; v < cameras_.size(); ++v) {
    if (config_.weight(v) == 0.0) continue;
    const Camera& cam = cameras_[v];
    ViewRender& view = scratch.views[v];
    const PixelBox touched = draw_object(candidate, index, cam, view);
    const PixelBox region = touched.dilated(1, cam.width, cam.height);
    const ImageF& curv = background_curvature_[v];
    const auto& rows = background_rows_[v];
    const std::size_t w = static_cast<std::size_t>(cam.width);
    ViewSums total;
    for (int r = 0; r < cam.height; ++r) {
      if (r >= region.y0 && r < region.y1) {
        float* row = scratch.row.data();
        std::copy(curv.row(r), curv.row(r) + w, row);
        curvature_row(view.normals, r, region.x0, region.x1, row + region.x0);
        const simd::WeightedSum s = simd::weighted_sum(row, maps_[v].distances.row(r), w);
        total.weighted += s.weighted;
        total.mass += s.mass;
      } else {
        total.weighted += rows[r].weighted;
        total.mass += rows[r].mass;
      }
    }
    scratch.sums[v] = total;
    view.copy_box(background_[v], touched);
  }
  return combine_view_sums(scratch.sums, maps_, config_);
}

double IncrementalCost::evaluate(const PlacedMesh& candidate) const {
  Scratch s = make_scratch();
  return evaluate(candidate, s);
}

std::vector<double> IncrementalCost::batch(std::span<const PlacedMesh> candidates) const {
  std::vector<double> out(candidates.size(), 0.0);
  const int workers = static_cast<int>(std::min<std::size_t>(threads_, std::max<std::size_t>(1, candidates.size())));
  std::vector<Scratch> scratch;
  scratch.reserve(workers);
  for (int k = 0; k < workers; ++k) scratch.push_back(make_scratch());
  parallel_for(candidates.size(), workers, [&](std::size_t i, int worker) {
    out[i] = evaluate(candidates[i], scratch[worker]);
  });
  return out;
}

}  // namespace curvpose
