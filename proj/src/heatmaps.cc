#include "curvpose/heatmaps.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "curvpose/errors.h"

namespace curvpose {

void HeatmapConfig::validate() const {
  if (!(sigma_scale > 0.0)) throw Error(ErrorCode::kInvalidArgument, "sigma_scale must be > 0");
  if (!(noise_sigma >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "noise_sigma must be >= 0");
  if (peak_min_distance < 1) throw Error(ErrorCode::kInvalidArgument, "peak_min_distance must be >= 1");
  if (!(peak_threshold > 0.0 && peak_threshold < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "peak_threshold must lie in (0, 1)");
  }
}

double blob_sigma(double sigma_scale, const Vec3& bbox_extents, double distance_to_camera) {
  return sigma_scale * (bbox_extents.mean() * 100.0) / distance_to_camera;
}

Heatmap center_heatmap(std::span<const Vec3> centers_world, std::span<const Mesh* const> mesh_per_center,
                       const Camera& camera, const HeatmapConfig& config, int view_index) {
  config.validate();
  camera.validate();
  if (centers_world.size() != mesh_per_center.size()) {
    throw Error(ErrorCode::kShapeMismatch, "one mesh per center is required");
  }
  Heatmap out{ImageF(camera.width, camera.height, 0.0f), view_index};
  const Vec3 eye = camera.center();
  for (std::size_t k = 0; k < centers_world.size(); ++k) {
    const Vec3& c = centers_world[k];
    if (!(camera.to_camera(c).z() > 0.0)) continue;
    const Vec3 pc = camera.to_camera(c);
    // Offsets from the principal point, so that shifting (cx, cy) by whole
    // pixels shifts the splat exactly.
    const double px_rel = camera.fx * pc.x() / pc.z();
    const double py_rel = camera.fy * pc.y() / pc.z();
    const Vec2 p(px_rel + camera.cx, py_rel + camera.cy);
    const double sigma = blob_sigma(config.sigma_scale, mesh_per_center[k]->bbox_extents, (c - eye).norm());
    const double radius = 4.0 * sigma;
    const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
    const int j0 = std::max(0, static_cast<int>(std::floor(p.x() - radius - 0.5)) - 1);
    const int j1 = std::min(camera.width - 1, static_cast<int>(std::ceil(p.x() + radius - 0.5)) + 1);
    const int i0 = std::max(0, static_cast<int>(std::floor(p.y() - radius - 0.5)) - 1);
    const int i1 = std::min(camera.height - 1, static_cast<int>(std::ceil(p.y() + radius - 0.5)) + 1);
    for (int i = i0; i <= i1; ++i) {
      const double dy = (i + 0.5 - camera.cy) - py_rel;
      float* row = out.values.row(i);
      for (int j = j0; j <= j1; ++j) {
        const double dx = (j + 0.5 - camera.cx) - px_rel;
        const double d2 = dx * dx + dy * dy;
        if (d2 > radius * radius) continue;
        const float v = static_cast<float>(std::min(1.0, std::exp(-d2 * inv_two_var)));
        row[j] = std::max(row[j], v);
      }
    }
  }
  return out;
}

Heatmap curvature_target(std::span<const PlacedMesh> objects, const Camera& camera, int view_index,
                         const std::vector<bool>& keep) {
  const ViewRender view = rasterize(objects, camera);
  Heatmap out{curvature_from_normals(view.normals), view_index};
  if (keep.empty()) return out;
  auto kept = [&](int r, int c) {
    const std::int32_t idx = view.object_index(r, c);
    return idx != kNoObject && static_cast<std::size_t>(idx) < keep.size() && keep[idx];
  };
  for (int r = 0; r < camera.height; ++r) {
    for (int c = 0; c < camera.width; ++c) {
      bool touch = false;
      for (int dr = -1; dr <= 1 && !touch; ++dr) {
        for (int dc = -1; dc <= 1 && !touch; ++dc) {
          const int rr = r + dr;
          const int cc = c + dc;
          if (rr >= 0 && cc >= 0 && rr < camera.height && cc < camera.width) touch = kept(rr, cc);
        }
      }
      if (!touch) out.values(r, c) = 0.0f;
    }
  }
  return out;
}

Heatmap corrupt(const Heatmap& h, double noise_sigma, std::uint64_t seed, bool clamp_to_unit) {
  if (!(noise_sigma >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "noise_sigma must be >= 0");
  Heatmap out = h;
  if (noise_sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_sigma);
  for (float& v : out.values.pixels()) {
    double x = static_cast<double>(v) + noise(rng);
    x = std::max(0.0, x);
    if (clamp_to_unit) x = std::min(1.0, x);
    v = static_cast<float>(x);
  }
  return out;
}

std::vector<Peak> detect_peaks(const Heatmap& h, const HeatmapConfig& config) {
  config.validate();
  const ImageF& img = h.values;
  const int r = config.peak_min_distance;
  const float threshold = static_cast<float>(config.peak_threshold);
  std::vector<Peak> peaks;
  for (int i = 0; i < img.height(); ++i) {
    for (int j = 0; j < img.width(); ++j) {
      const float v = img(i, j);
      if (!(v >= threshold)) continue;
      bool is_peak = true;
      for (int ii = std::max(0, i - r); ii <= std::min(img.height() - 1, i + r) && is_peak; ++ii) {
        for (int jj = std::max(0, j - r); jj <= std::min(img.width() - 1, j + r); ++jj) {
          if (ii == i && jj == j) continue;
          const float q = img(ii, jj);
          if (q > v || (q == v && (ii < i || (ii == i && jj < j)))) {
            is_peak = false;
            break;
          }
        }
      }
      if (is_peak) peaks.push_back(Peak{i, j, Vec2(j + 0.5, i + 0.5), static_cast<double>(v)});
    }
  }
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const Peak& a, const Peak& b) { return a.score > b.score; });
  return peaks;
}

double sample_bilinear(const ImageF& image, const Vec2& pixel) {
  if (!pixel.allFinite()) return 0.0;
  const double u = pixel.x() - 0.5;
  const double v = pixel.y() - 0.5;
  if (u <= -1.0 || v <= -1.0 || u >= image.width() || v >= image.height()) return 0.0;
  const int j0 = static_cast<int>(std::floor(u));
  const int i0 = static_cast<int>(std::floor(v));
  const double fu = u - j0;
  const double fv = v - i0;
  auto at = [&](int i, int j) -> double {
    if (i < 0 || j < 0 || i >= image.height() || j >= image.width()) return 0.0;
    return image(i, j);
  };
  const double top = (1.0 - fu) * at(i0, j0) + fu * at(i0, j0 + 1);
  const double bottom = (1.0 - fu) * at(i0 + 1, j0) + fu * at(i0 + 1, j0 + 1);
  return (1.0 - fv) * top + fv * bottom;
}

}  // namespace curvpose
