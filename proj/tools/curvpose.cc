// Command-line front end: gen, centers, solve, eval, render, bench-cost.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "curvpose/costfn.h"
#include "curvpose/errors.h"
#include "curvpose/grid_io.h"
#include "curvpose/metrics.h"
#include "curvpose/pipeline.h"
#include "curvpose/renderer.h"
#include "curvpose/scene_io.h"
#include "curvpose/simd/kernels.h"

namespace fs = std::filesystem;
using namespace curvpose;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitValidation = 3;
constexpr int kExitAlgorithm = 4;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingFile:
    case ErrorCode::kIoError:
    case ErrorCode::kMalformedFile:
    case ErrorCode::kUnknownVersion:
      return kExitIo;
    case ErrorCode::kValidationError:
    case ErrorCode::kInvalidDimensions:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kShapeMismatch:
      return kExitValidation;
    default:
      return kExitAlgorithm;
  }
}

SceneSpec default_spec() {
  SceneSpec spec;
  spec.classes = {{PrimitiveKind::kCube, {0.06}, 64},
                  {PrimitiveKind::kCuboid, {0.10, 0.06, 0.04}, 64},
                  {PrimitiveKind::kLBracket, {0.09, 0.06, 0.02, 0.04}, 64}};
  return spec;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

struct CenterFlags {
  double d_t = 0.03;
  double d_c = 0.03;
  double d_o = 0.03;
  int expected_count = 0;
  int min_views = TriangulationConfig{}.min_views;

  void add(CLI::App* app) {
    app->add_option("--d-t", d_t, "Max ray gap for a candidate (m)")->capture_default_str();
    app->add_option("--d-c", d_c, "Candidate merge radius (m)")->capture_default_str();
    app->add_option("--d-o", d_o, "Overlap pruning radius (m)")->capture_default_str();
    app->add_option("--expected-count", expected_count, "Keep at most this many centers (0 = all)");
    app->add_option("--min-views", min_views, "Views that must support a center")->capture_default_str();
  }
  TriangulationConfig config() const {
    TriangulationConfig c;
    c.d_t = d_t;
    c.d_c = d_c;
    c.d_o = d_o;
    if (expected_count > 0) c.expected_count = expected_count;
    c.min_views = min_views;
    return c;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-view center-and-curvature pose estimation"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic scene and its oracle heatmaps");
  std::string spec_path;
  std::uint64_t gen_seed = 0;
  double noise_sigma = 0.0;
  std::string out_dir;
  bool reference = false;
  bool no_png = false;
  gen->add_option("--spec", spec_path, "Scene spec JSON")->check(CLI::ExistingFile);
  gen->add_option("--seed", gen_seed, "RNG seed")->capture_default_str();
  gen->add_option("--noise-sigma", noise_sigma, "Heatmap noise standard deviation")->capture_default_str();
  gen->add_option("--out", out_dir, "Output directory")->required();
  gen->add_flag("--reference", reference, "Write the fixed three-cuboid reference scene");
  gen->add_flag("--no-png", no_png, "Skip PNG previews");

  // centers
  auto* centers = app.add_subcommand("centers", "Heatmaps to 3D centers");
  std::string data_dir;
  std::string out_file;
  int threads = 0;
  CenterFlags center_flags;
  centers->add_option("--data", data_dir, "Directory written by gen")->required();
  centers->add_option("--out", out_file, "Centers JSON (default <data>/centers.json)");
  centers->add_option("--threads", threads, "Worker threads (0 = all cores)");
  center_flags.add(centers);

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "Heatmaps to centers to poses");
  OptimizerConfig opt;
  std::string trace_path;
  solve_cmd->add_option("--data", data_dir, "Directory written by gen")->required();
  solve_cmd->add_option("--out", out_file, "Estimates JSON (default <data>/estimates.json)");
  solve_cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");
  solve_cmd->add_option("--candidates", opt.n_candidates, "Random pose candidates per object")->capture_default_str();
  solve_cmd->add_option("--refine", opt.n_refine, "Candidates refined by the simplex")->capture_default_str();
  solve_cmd->add_option("--seed", opt.rng_seed, "RNG seed")->capture_default_str();
  solve_cmd->add_option("--trace", trace_path, "Write per-iteration best cost as CSV");
  center_flags.add(solve_cmd);

  // eval
  auto* eval = app.add_subcommand("eval", "Estimates and ground truth to a metrics report");
  std::string estimates_path;
  std::string csv_path;
  EvalConfig eval_config;
  eval->add_option("--data", data_dir, "Directory holding scene.json")->required();
  eval->add_option("--estimates", estimates_path, "Estimates JSON (default <data>/estimates.json)");
  eval->add_option("--out", out_file, "Report JSON (default <data>/report.json)");
  eval->add_option("--csv", csv_path, "Per-record CSV (default <data>/report.csv)");
  eval->add_option("--theta-mspd-px", eval_config.theta_mspd_px, "MSPD threshold (px)")->capture_default_str();
  eval->add_option("--theta-mssd-frac", eval_config.theta_mssd_frac, "MSSD threshold (fraction of diameter)")
      ->capture_default_str();

  // render
  auto* render = app.add_subcommand("render", "Scene to curvature, normal and depth PNGs");
  std::string scene_path;
  render->add_option("--scene", scene_path, "Scene JSON")->required();
  render->add_option("--out", out_dir, "Output directory")->required();

  // bench-cost
  auto* bench = app.add_subcommand("bench-cost", "Cost-function throughput on the reference scene");
  std::vector<int> bench_threads{1, 4};
  int bench_evals = 2000;
  std::uint64_t bench_seed = 1;
  bench->add_option("--threads", bench_threads, "Thread counts to measure")->capture_default_str();
  bench->add_option("--evals", bench_evals, "Cost evaluations per measurement")->capture_default_str();
  bench->add_option("--seed", bench_seed, "Seed for pose perturbations")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }

  try {
    if (*gen) {
      SceneSpec spec = reference ? reference_spec() : default_spec();
      if (!spec_path.empty()) spec = spec_from_json(read_json(spec_path));
      HeatmapConfig hcfg;
      hcfg.noise_sigma = noise_sigma;
      std::mt19937_64 rng(gen_seed);
      const Scene scene = reference ? reference_scene() : generate_scene(spec, rng);
      const OracleData data = make_oracle(scene, hcfg, rng);
      fs::create_directories(out_dir);
      save_scene(scene, fs::path(out_dir) / "scene.json");
      write_json(fs::path(out_dir) / "spec.json",
                 {{"version", kFormatVersion}, {"seed", gen_seed}, {"noise_sigma", noise_sigma},
                  {"reference", reference}, {"spec", spec_to_json(spec)}});
      save_oracle(data, out_dir, !no_png);
      std::printf("wrote %zu objects, %zu views to %s\n", scene.instances.size(), scene.cameras.size(),
                  out_dir.c_str());
    } else if (*centers) {
      const Scene scene = load_scene(fs::path(data_dir) / "scene.json");
      const OracleData data = load_oracle(data_dir);
      const auto found = find_centers(data, scene.cameras, HeatmapConfig{}, center_flags.config(), threads);
      const fs::path out = out_file.empty() ? fs::path(data_dir) / "centers.json" : fs::path(out_file);
      write_json(out, centers_to_json(found));
      std::printf("found %zu centers\n", found.size());
    } else if (*solve_cmd) {
      const Scene scene = load_scene(fs::path(data_dir) / "scene.json");
      const OracleData data = load_oracle(data_dir);
      SolveConfig cfg;
      cfg.triangulation = center_flags.config();
      cfg.optimizer = opt;
      cfg.optimizer.threads = threads;
      std::vector<TraceRow> trace;
      const SolveResult result = solve(scene, data, cfg, trace_path.empty() ? nullptr : &trace);
      const fs::path out = out_file.empty() ? fs::path(data_dir) / "estimates.json" : fs::path(out_file);
      write_json(out, estimate_to_json(result.estimate));
      if (!trace_path.empty()) write_text(trace_path, trace_to_csv(trace));
      std::printf("estimated %zu objects\n", result.estimate.objects.size());
    } else if (*eval) {
      const Scene scene = load_scene(fs::path(data_dir) / "scene.json");
      const fs::path est_path = estimates_path.empty() ? fs::path(data_dir) / "estimates.json" : fs::path(estimates_path);
      const SceneEstimate est = estimate_from_json(read_json(est_path), scene);
      const EvalReport report = evaluate(est, scene, eval_config);
      const fs::path out = out_file.empty() ? fs::path(data_dir) / "report.json" : fs::path(out_file);
      write_json(out, report_to_json(report, eval_config));
      write_text(csv_path.empty() ? fs::path(data_dir) / "report.csv" : fs::path(csv_path), report_to_csv(report));
      std::printf("AR_MSSD<%.3g=%.4f AR_MSPD<%.3gpx=%.4f AR_MSSD_sweep=%.4f AR_MSPD_sweep=%.4f\n",
                  eval_config.theta_mssd_frac, report.ar_mssd, eval_config.theta_mspd_px, report.ar_mspd,
                  report.ar_mssd_sweep, report.ar_mspd_sweep);
    } else if (*render) {
      const Scene scene = load_scene(scene_path);
      std::vector<PlacedMesh> objects;
      for (const Instance& inst : scene.instances) {
        objects.push_back({&scene.class_by_id(inst.class_id).mesh, inst.pose});
      }
      const RenderedViews r = render_curvature(objects, scene.cameras, 1);
      const fs::path dir(out_dir);
      fs::create_directories(dir);
      for (std::size_t v = 0; v < r.views.size(); ++v) {
        const int vi = static_cast<int>(v);
        const std::string suffix = "_v" + std::to_string(v) + ".png";
        export_png16(dir / ("curvature" + suffix), r.curvature[v], "curvature", vi);
        export_png16(dir / ("depth" + suffix), r.views[v].depth, "depth", vi);
        export_normals_png16(dir / ("normals" + suffix), r.views[v].normals, vi);
      }
      std::printf("rendered %zu views to %s\n", r.views.size(), out_dir.c_str());
    } else if (*bench) {
      const Scene scene = reference_scene();
      std::vector<PlacedMesh> truth;
      for (const Instance& inst : scene.instances) truth.push_back({&scene.class_by_id(inst.class_id).mesh, inst.pose});
      std::vector<DistanceMap> maps;
      for (const Camera& cam : scene.cameras) {
        maps.push_back(distance_transform(curvature_target(truth, cam).values, CostConfig{}.binarize_threshold));
      }
      std::mt19937_64 rng(bench_seed);
      std::normal_distribution<double> n(0.0, 1.0);
      std::vector<PoseSet> sets;
      for (int k = 0; k < bench_evals; ++k) {
        PoseSet s = truth;
        for (PlacedMesh& m : s) {
          const Vec3 w(0.1 * n(rng), 0.1 * n(rng), 0.1 * n(rng));
          const Vec3 t(0.005 * n(rng), 0.005 * n(rng), 0.005 * n(rng));
          m.pose = Pose(rotation_from_axis_angle(w) * m.pose.rotation(), m.pose.translation() + t);
        }
        sets.push_back(std::move(s));
      }
      std::printf("isa=%s views=%zu objects=%zu evals=%d\n", simd::isa_name(simd::active_isa()),
                  scene.cameras.size(), truth.size(), bench_evals);
      std::vector<double> reference_costs;
      double base_rate = 0.0;
      for (int t : bench_threads) {
        const auto start = std::chrono::steady_clock::now();
        const std::vector<double> costs = batch_cost(sets, scene.cameras, maps, CostConfig{}, t);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const double rate = bench_evals / secs;
        if (reference_costs.empty()) {
          reference_costs = costs;
          base_rate = rate;
        }
        const bool identical = costs == reference_costs;
        std::printf("threads=%d evals_per_sec=%.1f speedup=%.2f bit_identical=%s\n", t, rate, rate / base_rate,
                    identical ? "yes" : "no");
      }
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitAlgorithm;
  }
  return 0;
}
