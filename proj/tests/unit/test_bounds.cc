#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "oracles.h"
#include "pseudoview/bounds.h"
#include "pseudoview/error.h"
#include "pseudoview/parallel.h"

namespace pseudoview {
namespace {

const CameraIntrinsics kK = CameraIntrinsics::make(1000, 1000, 319.5, 239.5, 640, 480);

TEST(PixelDisplacement, Examples) {
  const Displacement none = pixel_displacement(Vec3(0.3, 0.2, 4), Vec3::Zero(), kK);
  EXPECT_EQ(none.du, 0.0);
  EXPECT_EQ(none.dv, 0.0);
  const Displacement d = pixel_displacement(Vec3(1.7, -0.4, 5), Vec3(0.05, 0, 0), kK);
  EXPECT_NEAR(d.du, 10.0, 1e-12);
  EXPECT_NEAR(d.dv, 0.0, 1e-12);
  EXPECT_THROW(pixel_displacement(Vec3(0, 0, 1), Vec3(0, 0, -1), kK), GeometryError);
}

TEST(PixelDisplacement, MatchesPipeline) {
  SplitRng rng(21);
  for (int i = 0; i < 2000; ++i) {
    const auto k = CameraIntrinsics::make(rng.uniform(100, 2000), rng.uniform(100, 2000),
                                          rng.uniform(0, 640), rng.uniform(0, 480), 640, 480);
    const Vec3 p(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(0.5, 50));
    const Vec3 dt(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3));
    const Displacement d = pixel_displacement(p, dt, k);
    const Vec2 o = oracle::displacement(p, dt, k);
    EXPECT_NEAR(d.du, o.x(), 1e-9);
    EXPECT_NEAR(d.dv, o.y(), 1e-9);
  }
}

TEST(SolveBoundsLateral, ClosedForm) {
  const TranslationBounds b = solve_bounds_lateral(WarpBudget::make(10, 5), kK);
  EXPECT_NEAR(b.max_t_x, 0.05, 1e-15);
  EXPECT_NEAR(b.max_t_y, 0.05, 1e-15);
  EXPECT_EQ(b.t_z, 0.0);
}

TEST(SolveBoundsLateral, MonotoneInEpsilon) {
  double prev = 0.0;
  for (double eps : {1e-9, 1e-3, 0.5, 4.0, 32.0}) {
    const double tx = solve_bounds_lateral(WarpBudget::make(eps, 3), kK).max_t_x;
    EXPECT_GT(tx, prev);
    prev = tx;
  }
  EXPECT_LT(solve_bounds_lateral(WarpBudget::make(1e-9, 3), kK).max_t_x, 1e-11);
}

TEST(WarpBudget, Validation) {
  EXPECT_THROW(WarpBudget::make(0, 1), ValidationError);
  EXPECT_THROW(WarpBudget::make(1, -1), ValidationError);
}

TEST(SolveBoundsWithTz, RegimeGuard) {
  EXPECT_THROW(solve_bounds_with_tz(WarpBudget::make(10, 5, 0.0), kK), ValidationError);
  EXPECT_THROW(solve_bounds_with_tz(WarpBudget::make(10, 5, -5.0), kK), ValidationError);
}

TEST(SolveBoundsWithTz, ContinuousAtZero) {
  const TranslationBounds lat = solve_bounds_lateral(WarpBudget::make(10, 5), kK);
  for (double tz : {5e-6, -5e-6}) {
    const TranslationBounds b = solve_bounds_with_tz(WarpBudget::make(10, 5, tz), kK);
    EXPECT_NEAR(b.max_t_x, lat.max_t_x, 0.01 * lat.max_t_x);
    EXPECT_NEAR(b.max_t_y, lat.max_t_y, 0.01 * lat.max_t_y);
    EXPECT_EQ(b.t_z, tz);
  }
}

TEST(SolveBoundsWithTz, CertifiesOnPlaneAtZmin) {
  for (double tz : {0.2, -0.05, 0.05}) {
    const WarpBudget budget = WarpBudget::make(16, 4, tz);
    const TranslationBounds b = solve_bounds_with_tz(budget, kK);
    const DepthImage plane = DepthImage::constant(640, 480, 4.0f);
    EXPECT_TRUE(certify_bounds(plane, kK, b, 16).ok) << "t_z " << tz;
  }
}

TEST(SolveBoundsWithTz, ForwardOffsetCanExhaustBudget) {
  // t_z alone moves the frame corner by 320 * 0.2 / 3.8 > 16 px.
  EXPECT_THROW(solve_bounds_with_tz(WarpBudget::make(16, 4, -0.2), kK), ValidationError);
}

TEST(CertifyPose, ZeroMotion) {
  const Certification c = certify_pose(DepthImage::constant(64, 48, 2), CameraIntrinsics::make(50, 50, 32, 24, 64, 48),
                                       Vec3::Zero(), 1.0);
  EXPECT_TRUE(c.ok);
  EXPECT_EQ(c.max_disp, 0.0);
}

TEST(CertifyPose, TightAtZmin) {
  const double eps = 32, z_min = 1.7;
  const TranslationBounds b = solve_bounds_lateral(WarpBudget::make(eps, z_min), kK);
  const DepthImage plane = DepthImage::constant(640, 480, static_cast<float>(z_min));
  // The float depth differs from z_min by at most half an ulp.
  const double z = static_cast<float>(z_min);
  const Certification c = certify_pose(plane, kK, Vec3(b.max_t_x, b.max_t_y, 0), eps);
  EXPECT_NEAR(c.max_disp, eps * z_min / z, 1e-9);
  EXPECT_NEAR(c.max_disp, eps, 1e-6);
}

TEST(CertifyPose, SoundOnRandomDepth) {
  SplitRng rng(31);
  const auto k = CameraIntrinsics::make(300, 310, 79.5, 59.5, 160, 120);
  for (int i = 0; i < 20; ++i) {
    const double z_min = rng.uniform(0.5, 5);
    const DepthImage d = oracle::random_depth(160, 120, z_min, 0.1, rng);
    const TranslationBounds b = solve_bounds_lateral(WarpBudget::make(12, z_min), k);
    for (int j = 0; j < 10; ++j) {
      const Vec3 dt(rng.uniform(-1, 1) * b.max_t_x, rng.uniform(-1, 1) * b.max_t_y, 0);
      const Certification c = certify_pose(d, k, dt, 12);
      EXPECT_TRUE(c.ok);
      EXPECT_LE(c.max_disp, 12 * (1 + 1e-12));
    }
  }
}

TEST(CertifyPose, MonotoneInLateralMagnitude) {
  SplitRng rng(32);
  const auto k = CameraIntrinsics::make(300, 310, 79.5, 59.5, 160, 120);
  const DepthImage d = oracle::random_depth(160, 120, 1.0, 0.1, rng);
  double prev = 0.0;
  for (double s = 0.0; s <= 0.1; s += 0.01) {
    const double m = certify_pose(d, k, Vec3(s, 0.02, 0), 1e9).max_disp;
    EXPECT_GE(m, prev);
    prev = m;
  }
}

TEST(CertifyPose, BehindCameraFails) {
  const Certification c = certify_pose(DepthImage::constant(8, 8, 1), CameraIntrinsics::make(5, 5, 4, 4, 8, 8),
                                       Vec3(0, 0, -1.5), 100);
  EXPECT_FALSE(c.ok);
  EXPECT_TRUE(std::isinf(c.max_disp));
}

TEST(CertifyPose, RotationNeedsFullPipeline) {
  const auto k = CameraIntrinsics::make(50, 50, 32, 24, 64, 48);
  const DepthImage d = DepthImage::constant(64, 48, 3);
  const Pose rel = Pose::make(axis_angle(Vec3::UnitY(), 0.01), Vec3(0.01, 0, 0));
  EXPECT_THROW(certify_pose(d, k, rel, 5), ValidationError);
  EXPECT_NO_THROW(certify_pose(d, k, rel, 5, CertifyMode::kFullPipeline));
}

TEST(CertifyPose, ParallelMatchesReference) {
  SplitRng rng(33);
  const auto k = CameraIntrinsics::make(300, 310, 79.5, 59.5, 160, 120);
  const DepthImage d = oracle::random_depth(160, 120, 0.8, 0.1, rng);
  for (int i = 0; i < 10; ++i) {
    const Vec3 dt(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1));
    const Certification a = certify_pose(d, k, dt, 8);
    const Certification b = reference::certify_pose(d, k, dt, 8);
    EXPECT_EQ(a.ok, b.ok);
    EXPECT_NEAR(a.max_disp, b.max_disp, 1e-9 * b.max_disp);
  }
}

TEST(TightenBounds, ResultCertifies) {
  SplitRng rng(34);
  const auto k = CameraIntrinsics::make(300, 310, 79.5, 59.5, 160, 120);
  const DepthImage d = oracle::random_depth(160, 120, 2.0, 0.0, rng);
  const TranslationBounds init = solve_bounds_with_tz(WarpBudget::make(10, 2, 0.05), k);
  const auto t = tighten_bounds(d, k, init, 10);
  ASSERT_TRUE(t.has_value());
  EXPECT_LE(t->certification.max_disp, 10 * (1 + 1e-12));
  EXPECT_LE(t->bounds.max_t_x, init.max_t_x);
}

TEST(GeneratePseudoPose, ComponentwiseScaling) {
  const TranslationBounds b{0.05, 0.05, 0};
  const Pose base = Pose::make(axis_angle(Vec3::UnitZ(), 0.3), Vec3(1, 2, 3));
  const Pose p = generate_pseudo_pose(base, b, Vec2(1, 0));
  EXPECT_EQ(p.rotation, base.rotation);
  EXPECT_LT((p.translation - base.translation - Vec3(0.05, 0, 0)).norm(), 1e-15);
  EXPECT_EQ(generate_pseudo_pose(base, TranslationBounds{0, 0, 0}, Vec2(0, 1)), base);
  EXPECT_THROW(generate_pseudo_pose(base, b, Vec2(1, 1)), ValidationError);
}

}  // namespace
}  // namespace pseudoview
