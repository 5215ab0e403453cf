#include <gtest/gtest.h>

#include "checks.h"
#include "oracles.h"
#include "pseudoview/cascade.h"
#include "pseudoview/error.h"
#include "pseudoview/scene.h"

namespace pseudoview {
namespace {

InputView input_view(const Renderer& r, const CameraView& cam) {
  const RenderOutput out = r.render(cam.pose, cam.k);
  return {cam.pose, cam.k, out.image, out.depth};
}

CascadeConfig small_config() {
  CascadeConfig c = checks::demo_cascade_config();
  return c;
}

// Modifies one non-hole pixel.
class BrokenInpainter final : public Inpainter {
 public:
  InpaintResult inpaint(const ColorImage& image, const DepthImage& depth, const Mask& holes) const override {
    InpaintResult r{image, depth, holes};
    for (std::size_t i = 0; i < holes.size(); ++i) {
      if (!holes[i]) {
        r.image[i][0] = r.image[i][0] > 0.5f ? 0.0f : 1.0f;
        break;
      }
    }
    return r;
  }
};

TEST(SyntheticScene, FrontoParallelDepth) {
  Scene s;
  Plane p;
  p.point = Vec3(0, 0, 10);
  s.planes.push_back(p);
  const SyntheticSceneRenderer r(s);
  const auto k = CameraIntrinsics::make(40, 40, 15.5, 11.5, 32, 24);
  const RenderOutput out = r.render(Pose::identity(), k);
  for (std::size_t i = 0; i < out.depth.size(); ++i) EXPECT_FLOAT_EQ(out.depth.value(i), 10.0f);
}

TEST(SyntheticScene, NearestPlaneMatchesRayOracle) {
  const Scene s = checks::demo_scene();
  const SyntheticSceneRenderer r(s);
  const CameraView cam = checks::demo_camera(64, 48);
  const Pose pose = Pose::make(axis_angle(Vec3::UnitY(), 0.05), Vec3(0.2, -0.1, 0.3));
  const RenderOutput out = r.render(pose, cam.k);
  for (int y = 0; y < 48; ++y) {
    for (int x = 0; x < 64; ++x) {
      const auto hit = oracle::nearest_plane(s, pose, cam.k, x, y);
      ASSERT_TRUE(hit.hit);
      EXPECT_NEAR(out.depth.value(x, y), hit.depth, 1e-5 * hit.depth);
    }
  }
  EXPECT_EQ(r.render(pose, cam.k).image, out.image);
}

TEST(SyntheticScene, BehindEverythingThrows) {
  const SyntheticSceneRenderer r(checks::demo_scene());
  const CameraView cam = checks::demo_camera(32, 24);
  EXPECT_THROW(r.render(Pose::make(Mat3::Identity(), Vec3(0, 0, -20)), cam.k), GeometryError);
}

TEST(RunCascade, EmptyScheduleIsWarmupOnly) {
  SyntheticSceneRenderer r(checks::demo_scene());
  const CameraView cam = checks::demo_camera(64, 48);
  CascadeConfig c = small_config();
  c.warp_steps.clear();
  const CascadeResult res = run_cascade(c, r, HarmonicInpainter(), {input_view(r, cam)});
  EXPECT_TRUE(res.records.empty());
  EXPECT_EQ(res.rounds_run, 0);
  EXPECT_EQ(static_cast<int>(res.trace.size()), c.total_iterations);
  for (const auto& row : res.trace) EXPECT_FALSE(row.pseudo_active);
  EXPECT_EQ(r.update_count(), c.total_iterations);
}

TEST(RunCascade, LedgerShapeAndChaining) {
  SyntheticSceneRenderer r(checks::demo_scene());
  const CameraView cam = checks::demo_camera(96, 72);
  CascadeConfig c = small_config();
  c.warp_steps = {c.warp_steps.front()};
  const CascadeResult res = run_cascade(c, r, HarmonicInpainter(), {input_view(r, cam)});
  ASSERT_EQ(static_cast<int>(res.records.size()), c.views_per_round);
  const Vec3 step = res.records[0].offset;
  for (int j = 0; j < c.views_per_round; ++j) {
    const PseudoViewRecord& rec = res.records[static_cast<std::size_t>(j)];
    EXPECT_LE(rec.certified_max_disp, c.budget.epsilon * (1 + 1e-12));
    EXPECT_EQ(rec.parent.is_input, j == 0);
    EXPECT_EQ(rec.parent.index, j == 0 ? 0 : j - 1);
    EXPECT_EQ(rec.offset, step);
    // Non-holes of the warp survive the inpainter bit-exact.
    for (std::size_t i = 0; i < rec.warp_hole_mask.size(); ++i) {
      if (rec.residual_mask[i]) {
        EXPECT_TRUE(rec.warp_hole_mask[i]);
      }
    }
  }
  const Vec3 total = res.records.back().pose.translation - cam.pose.translation;
  EXPECT_LT((total - double(c.views_per_round) * step).norm(), 1e-12);
  for (const auto& row : res.trace) {
    EXPECT_EQ(row.pseudo_active, row.iteration >= c.warp_steps.front());
    EXPECT_EQ(row.total, row.l_ori + row.l_con);
  }
}

TEST(CascadeRound, NullInpainterOnIdentityWarp) {
  SyntheticSceneRenderer r(checks::demo_scene());
  const CameraView cam = checks::demo_camera(48, 36);
  CascadeConfig c = small_config();
  c.views_per_round = 1;
  c.directions = {Vec3::UnitX()};
  c.budget = WarpBudget::make(1e-9, 1.0);
  RoundPlan plan;
  plan.anchor_pose = cam.pose;
  plan.k = cam.k;
  const auto recs = cascade_round(r, NullInpainter(), plan, c);
  ASSERT_EQ(recs.size(), 1u);
  const RenderOutput src = r.render(cam.pose, cam.k);
  for (std::size_t i = 0; i < src.image.size(); ++i) {
    if (recs[0].warp_hole_mask[i]) continue;
    for (int ch = 0; ch < 3; ++ch) EXPECT_NEAR(recs[0].image[i][ch], src.image[i][ch], 1e-6);
  }
}

TEST(RunCascade, InpainterContractEnforced) {
  SyntheticSceneRenderer r(checks::demo_scene());
  const CameraView cam = checks::demo_camera(48, 36);
  EXPECT_THROW(run_cascade(small_config(), r, BrokenInpainter(), {input_view(r, cam)}), CascadeError);
}

TEST(RunCascade, Deterministic) {
  const CameraView cam = checks::demo_camera(64, 48);
  SyntheticSceneRenderer r1(checks::demo_scene()), r2(checks::demo_scene());
  const CascadeResult a = run_cascade(small_config(), r1, HarmonicInpainter(), {input_view(r1, cam)});
  const CascadeResult b = run_cascade(small_config(), r2, HarmonicInpainter(), {input_view(r2, cam)});
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].image, b.records[i].image);
    EXPECT_EQ(a.records[i].pose, b.records[i].pose);
  }
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) EXPECT_EQ(a.trace[i].total, b.trace[i].total);
  EXPECT_EQ(a.renderer_state, b.renderer_state);
}

TEST(SelectAnchor, FarthestAlongDirection) {
  std::vector<InputView> views(3);
  // Camera centers at x = 0, 2, -1 (center = -R^T T).
  views[0].pose = Pose::make(Mat3::Identity(), Vec3(0, 0, 0));
  views[1].pose = Pose::make(Mat3::Identity(), Vec3(-2, 0, 0));
  views[2].pose = Pose::make(Mat3::Identity(), Vec3(1, 0, 0));
  EXPECT_EQ(select_anchor(views, Vec3::UnitX()), 1);
  EXPECT_EQ(select_anchor(views, -Vec3::UnitX()), 2);
}

TEST(CascadeConfig, Validation) {
  CascadeConfig c;
  EXPECT_NO_THROW(c.validate());
  c.warp_steps = {4000, 2000};
  EXPECT_THROW(c.validate(), ValidationError);
  c = CascadeConfig{};
  c.warp_steps = {13'000};
  EXPECT_THROW(c.validate(), ValidationError);
  const CascadeConfig s = CascadeConfig::scaled_schedule(100);
  EXPECT_EQ(s.total_iterations, 120);
  EXPECT_EQ(s.warp_steps, (std::vector<int>{30, 60, 90}));
  EXPECT_EQ(s.warmup_iterations, 30);
}

}  // namespace
}  // namespace pseudoview
