#include "curvpose/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <tuple>

#include "curvpose/errors.h"

namespace curvpose {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double json_number(double v) { return std::isfinite(v) ? v : -1.0; }

std::vector<double> linear_grid(double first, double step, int count) {
  std::vector<double> out;
  for (int k = 0; k < count; ++k) out.push_back(first + step * k);
  return out;
}

}  // namespace

double mssd(const Pose& p_hat, const Pose& p_bar, std::span<const Pose> symmetries, std::span<const Vec3> vertices) {
  if (vertices.empty()) throw Error(ErrorCode::kEmptyMesh, "mssd needs vertices");
  const Pose identity;
  const std::span<const Pose> syms = symmetries.empty() ? std::span<const Pose>(&identity, 1) : symmetries;
  double best = kInf;
  for (const Pose& s : syms) {
    const Pose gt = compose(p_bar, s);
    double worst = 0.0;
    for (const Vec3& x : vertices) worst = std::max(worst, (p_hat.apply(x) - gt.apply(x)).norm());
    best = std::min(best, worst);
  }
  return best;
}

double mspd(const Pose& p_hat, const Pose& p_bar, std::span<const Pose> symmetries, std::span<const Vec3> vertices,
            const Camera& camera) {
  if (vertices.empty()) throw Error(ErrorCode::kEmptyMesh, "mspd needs vertices");
  const Pose identity;
  const std::span<const Pose> syms = symmetries.empty() ? std::span<const Pose>(&identity, 1) : symmetries;
  std::vector<Vec2> est;
  est.reserve(vertices.size());
  for (const Vec3& x : vertices) est.push_back(project(camera, p_hat.apply(x)));
  double best = kInf;
  for (const Pose& s : syms) {
    const Pose gt = compose(p_bar, s);
    double worst = 0.0;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      worst = std::max(worst, (est[i] - project(camera, gt.apply(vertices[i]))).norm());
    }
    best = std::min(best, worst);
  }
  return best;
}

double average_recall(std::span<const PoseError> errors, Metric metric, double threshold) {
  if (errors.empty()) throw Error(ErrorCode::kInvalidArgument, "average recall of an empty error list");
  std::size_t hits = 0;
  for (const PoseError& e : errors) {
    const bool ok = metric == Metric::kMspd ? e.mspd < threshold : e.mssd < threshold * e.diameter;
    if (ok) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(errors.size());
}

double average_recall(std::span<const PoseError> errors, Metric metric, std::span<const double> thresholds) {
  if (thresholds.empty()) throw Error(ErrorCode::kInvalidArgument, "empty threshold grid");
  double sum = 0.0;
  for (double t : thresholds) sum += average_recall(errors, metric, t);
  return sum / static_cast<double>(thresholds.size());
}

std::vector<double> mssd_sweep_thresholds() { return linear_grid(0.05, 0.05, 10); }
std::vector<double> mspd_sweep_thresholds() { return linear_grid(5.0, 5.0, 10); }

std::vector<Match> match_estimates(const SceneEstimate& estimate, const Scene& ground_truth) {
  struct Pair {
    double error;
    int gt;
    int est;
  };
  std::vector<Pair> pairs;
  for (std::size_t g = 0; g < ground_truth.instances.size(); ++g) {
    const Instance& inst = ground_truth.instances[g];
    const ObjectClass& cls = ground_truth.class_by_id(inst.class_id);
    for (std::size_t e = 0; e < estimate.objects.size(); ++e) {
      if (estimate.objects[e].class_id != inst.class_id) continue;
      pairs.push_back({mssd(estimate.objects[e].pose, inst.pose, cls.symmetries, cls.mesh.vertices),
                       static_cast<int>(g), static_cast<int>(e)});
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return std::tie(a.error, a.gt, a.est) < std::tie(b.error, b.gt, b.est);
  });
  std::vector<Match> out(ground_truth.instances.size());
  for (std::size_t g = 0; g < out.size(); ++g) out[g].gt = static_cast<int>(g);
  std::vector<bool> used(estimate.objects.size(), false);
  for (const Pair& p : pairs) {
    if (out[p.gt].estimate >= 0 || used[p.est]) continue;
    out[p.gt].estimate = p.est;
    out[p.gt].mssd = p.error;
    used[p.est] = true;
  }
  return out;
}

EvalReport summarize(std::vector<PoseError> records, const EvalConfig& config) {
  EvalReport r;
  r.records = std::move(records);
  if (r.records.empty()) return r;
  r.ar_mspd = average_recall(r.records, Metric::kMspd, config.theta_mspd_px);
  r.ar_mssd = average_recall(r.records, Metric::kMssd, config.theta_mssd_frac);
  r.ar_mspd_sweep = average_recall(r.records, Metric::kMspd, mspd_sweep_thresholds());
  r.ar_mssd_sweep = average_recall(r.records, Metric::kMssd, mssd_sweep_thresholds());
  return r;
}

EvalReport evaluate(const SceneEstimate& estimate, const Scene& ground_truth, const EvalConfig& config) {
  const std::vector<Match> matches = match_estimates(estimate, ground_truth);
  std::vector<PoseError> records;
  for (const Match& m : matches) {
    const Instance& inst = ground_truth.instances[m.gt];
    const ObjectClass& cls = ground_truth.class_by_id(inst.class_id);
    for (std::size_t v = 0; v < ground_truth.cameras.size(); ++v) {
      PoseError e;
      e.gt_index = m.gt;
      e.estimate_index = m.estimate;
      e.class_id = inst.class_id;
      e.view = static_cast<int>(v);
      e.diameter = cls.mesh.diameter;
      if (m.estimate >= 0) {
        e.mssd = m.mssd;
        try {
          e.mspd = mspd(estimate.objects[m.estimate].pose, inst.pose, cls.symmetries, cls.mesh.vertices,
                        ground_truth.cameras[v]);
        } catch (const Error& err) {
          if (err.code() != ErrorCode::kBehindCamera) throw;
        }
      }
      records.push_back(e);
    }
  }
  return summarize(std::move(records), config);
}

nlohmann::json report_to_json(const EvalReport& report, const EvalConfig& config) {
  nlohmann::json records = nlohmann::json::array();
  for (const PoseError& e : report.records) {
    records.push_back({{"gt_index", e.gt_index},
                       {"estimate_index", e.estimate_index},
                       {"class_id", e.class_id},
                       {"view", e.view},
                       {"mspd_px", json_number(e.mspd)},
                       {"mssd_m", json_number(e.mssd)},
                       {"diameter_m", e.diameter}});
  }
  return {{"version", 1},
          {"theta_mspd_px", config.theta_mspd_px},
          {"theta_mssd_frac", config.theta_mssd_frac},
          {"ar_mspd", report.ar_mspd},
          {"ar_mssd", report.ar_mssd},
          {"ar_mspd_sweep", report.ar_mspd_sweep},
          {"ar_mssd_sweep", report.ar_mssd_sweep},
          {"records", records}};
}

std::string report_to_csv(const EvalReport& report) {
  std::string out = "gt_index,estimate_index,class_id,view,mspd_px,mssd_m,diameter_m\n";
  char line[256];
  for (const PoseError& e : report.records) {
    std::snprintf(line, sizeof(line), "%d,%d,%d,%d,%.17g,%.17g,%.17g\n", e.gt_index, e.estimate_index, e.class_id,
                  e.view, e.mspd, e.mssd, e.diameter);
    out += line;
  }
  return out;
}

}  // namespace curvpose
