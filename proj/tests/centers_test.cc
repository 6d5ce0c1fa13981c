#include "curvpose/centers.h"

#include <algorithm>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "curvpose/pipeline.h"
#include "curvpose/scene_io.h"
#include "test_util.h"

namespace curvpose {
namespace {

using testing::error_code_of;

std::vector<Camera> ring(int n = 6) {
  CameraRing r;
  r.n_views = n;
  return make_camera_ring(r, Vec3::Zero());
}

// Exact projections as peaks.
std::vector<std::vector<Peak>> exact_peaks(std::span<const Vec3> points, std::span<const Camera> cams) {
  std::vector<std::vector<Peak>> out(cams.size());
  for (std::size_t v = 0; v < cams.size(); ++v) {
    for (const Vec3& p : points) out[v].push_back(Peak{0, 0, project(cams[v], p), 1.0});
  }
  return out;
}

Center3D center_at(Vec3 p, double score, int views = 6) {
  Center3D c;
  c.position = p;
  c.per_view_scores.assign(views, score / views);
  c.aggregate_score = score;
  return c;
}

TEST(Triangulate, ExactRaysMeetAtThePoint) {
  const auto cams = ring();
  const Vec3 p(0.02, -0.03, 0.01);
  const auto cand = triangulate_candidates(exact_peaks({&p, 1}, cams), cams, TriangulationConfig{});
  ASSERT_EQ(cand.size(), 15u);  // 6 choose 2
  for (const Vec3& c : cand) EXPECT_LT((c - p).norm(), 1e-6);
}

TEST(Triangulate, DistantObjectsDoNotCross) {
  const auto cams = ring();
  const std::vector<Vec3> pts{Vec3(-0.15, 0.0, 0.0), Vec3(0.15, 0.05, 0.0)};
  const auto cand = triangulate_candidates(exact_peaks(pts, cams), cams, TriangulationConfig{});
  int near_a = 0, near_b = 0, ghosts = 0;
  for (const Vec3& c : cand) {
    if ((c - pts[0]).norm() < 1e-6) ++near_a;
    else if ((c - pts[1]).norm() < 1e-6) ++near_b;
    else ++ghosts;
  }
  EXPECT_EQ(near_a, 15);
  EXPECT_EQ(near_b, 15);
  // Cross-object pairs only pass the gap test where two rays happen to meet.
  EXPECT_LE(ghosts, 6);
}

TEST(Triangulate, NeedsTwoViews) {
  const auto cams = ring(1);
  const Vec3 p = Vec3::Zero();
  EXPECT_EQ(error_code_of([&] { triangulate_candidates(exact_peaks({&p, 1}, cams), cams, TriangulationConfig{}); }),
            ErrorCode::kInsufficientViews);
  const auto six = ring();
  auto peaks = exact_peaks({&p, 1}, six);
  peaks.pop_back();
  EXPECT_EQ(error_code_of([&] { triangulate_candidates(peaks, six, TriangulationConfig{}); }),
            ErrorCode::kShapeMismatch);
}

TEST(Merge, HandCases) {
  EXPECT_TRUE(merge_candidates({}, 0.03).empty());
  const std::vector<Vec3> pts{Vec3(0, 0, 0), Vec3(0.01, 0, 0), Vec3(0.5, 0, 0)};
  const auto m = merge_candidates(pts, 0.03);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_TRUE(m[0].isApprox(Vec3(0.005, 0, 0)));
  EXPECT_EQ(m[1], Vec3(0.5, 0, 0));
  // Exactly d_c apart stays separate.
  const std::vector<Vec3> edge{Vec3(0, 0, 0), Vec3(0.25, 0, 0)};
  EXPECT_EQ(merge_candidates(edge, 0.25).size(), 2u);
}

TEST(Merge, ChainMergesThroughCentroid) {
  // 0 and 0.02 merge first (closest), centroid 0.01 then absorbs 0.035.
  const std::vector<Vec3> pts{Vec3(0.035, 0, 0), Vec3(0, 0, 0), Vec3(0.02, 0, 0)};
  const auto m = merge_candidates(pts, 0.03);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_NEAR(m[0].x(), 0.055 / 3.0, 1e-15);
}

TEST(Merge, OrderedBySizeThenPosition) {
  const std::vector<Vec3> pts{Vec3(1, 0, 0), Vec3(0.5, 0, 0), Vec3(0.2, 0, 0), Vec3(0.201, 0, 0)};
  const auto m = merge_candidates(pts, 0.03);
  ASSERT_EQ(m.size(), 3u);
  EXPECT_NEAR(m[0].x(), 0.2005, 1e-12);
  EXPECT_EQ(m[1].x(), 0.5);
  EXPECT_EQ(m[2].x(), 1.0);
}

struct BlobScene {
  std::vector<Camera> cams = ring();
  Mesh mesh = primitive_mesh({PrimitiveKind::kCube, {0.06}}).first;
  std::vector<Heatmap> maps;

  explicit BlobScene(std::span<const Vec3> centers) {
    std::vector<const Mesh*> mp(centers.size(), &mesh);
    for (std::size_t v = 0; v < cams.size(); ++v) {
      maps.push_back(center_heatmap(centers, mp, cams[v], HeatmapConfig{}, int(v)));
    }
  }
  double total(const Vec3& p) const {
    const auto s = reprojection_scores(p, maps, cams);
    return std::accumulate(s.begin(), s.end(), 0.0);
  }
};

TEST(Refine, StaysAtTheMaximum) {
  const Vec3 p(0.01, 0.02, 0.0);
  const BlobScene s({&p, 1});
  const auto out = refine_and_score({&p, 1}, s.maps, s.cams, TriangulationConfig{});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_GE(out[0].aggregate_score, s.total(p));
  EXPECT_LT((out[0].position - p).norm(), 1e-3);
  EXPECT_EQ(out[0].per_view_scores.size(), 6u);
  EXPECT_DOUBLE_EQ(out[0].aggregate_score,
                   std::accumulate(out[0].per_view_scores.begin(), out[0].per_view_scores.end(), 0.0));
}

TEST(Refine, RecoversFromOffsetStart) {
  const Vec3 p(-0.02, 0.01, 0.01);
  const BlobScene s({&p, 1});
  const Vec3 start = p + Vec3(0.012, -0.01, 0.008);  // ~2 blob sigmas in the images
  const auto out = refine_and_score({&start, 1}, s.maps, s.cams, TriangulationConfig{});
  EXPECT_GT(out[0].aggregate_score, s.total(start));
  EXPECT_LT((out[0].position - p).norm(), 2e-3);
}

TEST(Refine, PointOutsideAllViewsScoresZero) {
  const Vec3 p = Vec3::Zero();
  const BlobScene s({&p, 1});
  const Vec3 far(0, 0, 5.0);  // above every camera, projects out of all images
  const auto out = refine_and_score({&far, 1}, s.maps, s.cams, TriangulationConfig{});
  EXPECT_EQ(out[0].aggregate_score, 0.0);
  EXPECT_EQ(out[0].position, far);
}

TEST(Refine, ThreadCountDoesNotMatter) {
  const std::vector<Vec3> pts{Vec3(0.05, 0, 0), Vec3(-0.06, 0.04, 0)};
  const BlobScene s(pts);
  std::vector<Vec3> starts{pts[0] + Vec3(0.004, 0, 0), pts[1] + Vec3(0, -0.005, 0.003), Vec3(0.2, 0.2, 0)};
  const auto a = refine_and_score(starts, s.maps, s.cams, TriangulationConfig{}, 1);
  const auto b = refine_and_score(starts, s.maps, s.cams, TriangulationConfig{}, 3);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].position, b[k].position);
    EXPECT_EQ(a[k].per_view_scores, b[k].per_view_scores);
  }
}

TEST(Prune, SuppressesLowerScoringNeighbours) {
  TriangulationConfig cfg;
  const std::vector<Center3D> in{center_at(Vec3(0, 0, 0), 3.0), center_at(Vec3(0.02, 0, 0), 5.0),
                                 center_at(Vec3(0.2, 0, 0), 4.0)};
  const auto out = prune(in, cfg);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].position, Vec3(0.02, 0, 0));
  EXPECT_EQ(out[1].position, Vec3(0.2, 0, 0));
}

TEST(Prune, ExpectedCountTruncates) {
  TriangulationConfig cfg;
  cfg.expected_count = 1;
  const std::vector<Center3D> in{center_at(Vec3(0, 0, 0), 3.0), center_at(Vec3(0.5, 0, 0), 5.0)};
  const auto out = prune(in, cfg);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].aggregate_score, 5.0);
  cfg.expected_count = 7;
  EXPECT_EQ(prune(in, cfg).size(), 2u);
  cfg.expected_count = -1;
  EXPECT_EQ(error_code_of([&] { prune(in, cfg); }), ErrorCode::kInvalidArgument);
}

TEST(Prune, DropsWeaklySupportedCenters) {
  TriangulationConfig cfg;
  Center3D ghost = center_at(Vec3(0.3, 0, 0), 1.2);
  ghost.per_view_scores = {0.6, 0.6, 0, 0, 0, 0};
  const std::vector<Center3D> in{center_at(Vec3(0, 0, 0), 5.0), ghost};
  EXPECT_EQ(prune(in, cfg).size(), 1u);
  cfg.min_views = 0;
  EXPECT_EQ(prune(in, cfg).size(), 2u);
}

TEST(Prune, Idempotent) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.1, 0.1), s(0.5, 6.0);
  std::vector<Center3D> in;
  for (int k = 0; k < 40; ++k) in.push_back(center_at(Vec3(u(rng), u(rng), u(rng)), s(rng)));
  const auto once = prune(in, TriangulationConfig{});
  const auto twice = prune(once, TriangulationConfig{});
  ASSERT_EQ(once.size(), twice.size());
  for (std::size_t k = 0; k < once.size(); ++k) EXPECT_EQ(once[k].position, twice[k].position);
  for (std::size_t i = 0; i < once.size(); ++i) {
    for (std::size_t j = i + 1; j < once.size(); ++j) EXPECT_GE((once[i].position - once[j].position).norm(), 0.03);
  }
}

TEST(DetectCenters, FindsFiveObjectsFromOracleMaps) {
  SceneSpec spec;
  spec.n_objects = 5;
  spec.classes = {{PrimitiveKind::kCube, {0.06}},
                  {PrimitiveKind::kCuboid, {0.10, 0.06, 0.04}},
                  {PrimitiveKind::kLBracket, {0.09, 0.06, 0.02, 0.04}}};
  spec.region_half_extent = Vec3(0.18, 0.18, 0.03);
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const auto [scene, data] = generate_dataset(spec, HeatmapConfig{}, seed);
    std::vector<Vec3> truth;
    for (const auto& inst : scene.instances) truth.push_back(scene.instance_center(inst));
    const auto found = find_centers(data, scene.cameras, HeatmapConfig{}, TriangulationConfig{});
    ASSERT_EQ(found.size(), 5u) << "seed " << seed;

    // Best bijection over all 5! assignments, minimizing the worst distance.
    std::vector<int> perm{0, 1, 2, 3, 4};
    double best = 1e9;
    do {
      double worst = 0.0;
      for (int k = 0; k < 5; ++k) worst = std::max(worst, (found[k].position - truth[perm[k]]).norm());
      best = std::min(best, worst);
    } while (std::next_permutation(perm.begin(), perm.end()));
    EXPECT_LT(best, 5e-3) << "seed " << seed;
  }
}

}  // namespace
}  // namespace curvpose
