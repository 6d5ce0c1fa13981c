#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "curvpose/geometry.h"
#include "curvpose/image.h"
#include "curvpose/mesh.h"
#include "curvpose/renderer.h"

namespace curvpose {

// Non-negative scalar field for one view. Center heatmaps are additionally <= 1.
struct Heatmap {
  ImageF values;
  int view_index = 0;
};

struct HeatmapConfig {
  double sigma_scale = 0.5;     // s_e
  double noise_sigma = 0.0;
  int peak_min_distance = 5;    // pixels
  double peak_threshold = 0.3;

  void validate() const;
};

// Blob standard deviation in pixels: s_e * (mean bbox extent * 100) / distance.
double blob_sigma(double sigma_scale, const Vec3& bbox_extents, double distance_to_camera);

// Gaussian blob per center, combined by per-pixel maximum and clamped to [0, 1].
// Centers behind the camera are skipped. Splats are truncated at 4 sigma.
Heatmap center_heatmap(std::span<const Vec3> centers_world, std::span<const Mesh* const> mesh_per_center,
                       const Camera& camera, const HeatmapConfig& config, int view_index = 0);

// Rendered curvature of the scene. When `keep` is non-empty, only pixels whose
// 3x3 neighborhood touches an object with keep[index] == true retain curvature.
Heatmap curvature_target(std::span<const PlacedMesh> objects, const Camera& camera, int view_index = 0,
                         const std::vector<bool>& keep = {});

// Adds N(0, noise_sigma^2) per pixel in row-major order from a generator seeded
// with `seed`, then clamps to >= 0 (and <= 1 when clamp_to_unit).
Heatmap corrupt(const Heatmap& h, double noise_sigma, std::uint64_t seed, bool clamp_to_unit);

struct Peak {
  int row = 0;
  int col = 0;
  Vec2 pixel = Vec2::Zero();  // continuous coordinates of the pixel center
  double score = 0.0;
};

// Strict local maxima within a square window of radius peak_min_distance with
// value >= peak_threshold. Among equal values in a window the smallest (row, col)
// wins. Sorted by descending score, then (row, col).
std::vector<Peak> detect_peaks(const Heatmap& h, const HeatmapConfig& config);

// Bilinear interpolation at continuous coordinates; samples outside the grid
// read as zero.
double sample_bilinear(const ImageF& image, const Vec2& pixel);

}  // namespace curvpose
