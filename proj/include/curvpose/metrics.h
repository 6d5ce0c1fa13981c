#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "curvpose/geometry.h"
#include "curvpose/mesh.h"
#include "curvpose/optimizer.h"
#include "curvpose/scene_io.h"

namespace curvpose {

// min over S of max over x of |P_hat x - P_bar S x|. Throws kEmptyMesh.
double mssd(const Pose& p_hat, const Pose& p_bar, std::span<const Pose> symmetries, std::span<const Vec3> vertices);

// Image-plane analogue of mssd in pixels. Throws kBehindCamera.
double mspd(const Pose& p_hat, const Pose& p_bar, std::span<const Pose> symmetries, std::span<const Vec3> vertices,
            const Camera& camera);

enum class Metric { kMspd, kMssd };

// One record per (ground-truth object, view). Misses carry +inf errors.
struct PoseError {
  int gt_index = 0;
  int estimate_index = -1;
  int class_id = 0;
  int view = 0;
  double mspd = std::numeric_limits<double>::infinity();  // px
  double mssd = std::numeric_limits<double>::infinity();  // m
  double diameter = 0.0;                                  // m
};

// Fraction of records with error < threshold (strict). For kMssd the threshold
// is a fraction of each object's diameter. Throws kInvalidArgument when empty.
double average_recall(std::span<const PoseError> errors, Metric metric, double threshold);
// Mean of average_recall over the thresholds.
double average_recall(std::span<const PoseError> errors, Metric metric, std::span<const double> thresholds);

// BOP-style grids: MSSD 0.05..0.5 of the diameter, MSPD 5..50 px.
std::vector<double> mssd_sweep_thresholds();
std::vector<double> mspd_sweep_thresholds();

struct Match {
  int estimate = -1;  // -1 for a miss
  int gt = 0;
  double mssd = std::numeric_limits<double>::infinity();
};

// Greedy by ascending MSSD within each class; one match per ground truth.
std::vector<Match> match_estimates(const SceneEstimate& estimate, const Scene& ground_truth);

struct EvalConfig {
  double theta_mspd_px = 5.0;
  double theta_mssd_frac = 0.05;
};

struct EvalReport {
  std::vector<PoseError> records;
  double ar_mspd = 0.0;
  double ar_mssd = 0.0;
  double ar_mspd_sweep = 0.0;
  double ar_mssd_sweep = 0.0;
};

// An estimate that puts vertices behind a camera scores mspd = +inf in that view.
EvalReport evaluate(const SceneEstimate& estimate, const Scene& ground_truth, const EvalConfig& config);
EvalReport summarize(std::vector<PoseError> records, const EvalConfig& config);

nlohmann::json report_to_json(const EvalReport& report, const EvalConfig& config);
std::string report_to_csv(const EvalReport& report);

}  // namespace curvpose
