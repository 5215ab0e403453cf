#include <gtest/gtest.h>

#include <Eigen/Geometry>

#include "oracles.h"
#include "pseudoview/error.h"
#include "pseudoview/geometry.h"
#include "pseudoview/rng.h"

namespace pseudoview {
namespace {

Pose random_pose(SplitRng& rng) {
  const Vec3 axis = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)).normalized();
  return Pose::make(axis_angle(axis, rng.uniform(-3, 3)),
                    Vec3(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)));
}

TEST(Project, OpticalAxisHitsPrincipalPoint) {
  const auto k = CameraIntrinsics::make(1, 1, 0, 0, 1, 1);
  const Pixel px = project(Vec3(0, 0, 1), k);
  EXPECT_EQ(px.u, 0.0);
  EXPECT_EQ(px.v, 0.0);
}

TEST(Project, HandEvaluated) {
  const auto k = CameraIntrinsics::make(100, 200, 50, 60, 640, 480);
  const Pixel px = project(Vec3(2, -1, 2), k);
  EXPECT_DOUBLE_EQ(px.u, 150.0);
  EXPECT_DOUBLE_EQ(px.v, -40.0);
}

TEST(Project, RejectsZeroDepth) {
  const auto k = CameraIntrinsics::make(1, 1, 0, 0, 1, 1);
  EXPECT_THROW(project(Vec3(1, 1, 0), k), GeometryError);
  EXPECT_THROW(project(Vec3(1, 1, -2), k), GeometryError);
}

TEST(Unproject, PrincipalRay) {
  const auto k = CameraIntrinsics::make(500, 500, 320, 240, 640, 480);
  const Point3 p = unproject({320, 240}, 5, k);
  EXPECT_EQ(p, Vec3(0, 0, 5));
}

TEST(Unproject, InverseOfProjectExample) {
  const auto k = CameraIntrinsics::make(100, 200, 50, 60, 640, 480);
  const Point3 p = unproject({150, -40}, 2, k);
  EXPECT_NEAR((p - Vec3(2, -1, 2)).norm(), 0.0, 1e-12);
  EXPECT_THROW(unproject({1, 1}, 0, k), GeometryError);
}

TEST(Unproject, RoundTripRandom) {
  SplitRng rng(11);
  const auto k = CameraIntrinsics::make(612.5, 598.0, 319.3, 241.7, 640, 480);
  for (int i = 0; i < 1000; ++i) {
    const Pixel px{rng.uniform(-100, 740), rng.uniform(-100, 580)};
    const double d = rng.uniform(0.01, 500);
    const Pixel back = project(unproject(px, d, k), k);
    EXPECT_NEAR(back.u, px.u, 1e-9);
    EXPECT_NEAR(back.v, px.v, 1e-9);
  }
}

TEST(Intrinsics, Validation) {
  EXPECT_THROW(CameraIntrinsics::make(0, 1, 0, 0, 1, 1), ValidationError);
  EXPECT_THROW(CameraIntrinsics::make(1, 1, 0, 0, 0, 1), ValidationError);
}

TEST(RelativePose, SelfIsIdentity) {
  SplitRng rng(3);
  for (int i = 0; i < 20; ++i) {
    const Pose a = random_pose(rng);
    const Pose r = relative_pose(a, a);
    EXPECT_LT((r.rotation - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT(r.translation.norm(), 1e-12);
  }
}

TEST(RelativePose, FromIdentity) {
  const Pose t = Pose::make(Mat3::Identity(), Vec3(0.3, -0.2, 1.0));
  const Pose r = relative_pose(Pose::identity(), t);
  EXPECT_EQ(r.rotation, Mat3::Identity());
  EXPECT_EQ(r.translation, Vec3(0.3, -0.2, 1.0));
}

TEST(RelativePose, MatchesSequentialTransforms) {
  SplitRng rng(5);
  for (int i = 0; i < 200; ++i) {
    const Pose a = random_pose(rng);
    const Pose b = random_pose(rng);
    const Vec3 world(rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10));
    const Vec3 in_a = a.apply(world);
    const Vec3 in_b = b.apply(world);
    EXPECT_LT((relative_pose(a, b).apply(in_a) - in_b).norm(), 1e-9);
  }
}

TEST(Pose, CompositionStaysOrthonormal) {
  SplitRng rng(8);
  Pose acc = Pose::identity();
  for (int i = 0; i < 10000; ++i) acc = random_pose(rng) * acc;
  EXPECT_LT(rotation_defect(acc.rotation), 1e-9);
  EXPECT_NEAR(acc.rotation.determinant(), 1.0, 1e-9);
}

TEST(Pose, InverseRoundTrip) {
  SplitRng rng(9);
  const Pose p = random_pose(rng);
  const Vec3 x(1, 2, 3);
  EXPECT_LT((p.inverse().apply(p.apply(x)) - x).norm(), 1e-12);
}

TEST(Pose, RejectsNonOrthonormal) {
  Mat3 r = Mat3::Identity();
  r(0, 1) = 0.01;
  EXPECT_THROW(Pose::make(r, Vec3::Zero()), ValidationError);
  EXPECT_LT(rotation_defect(orthonormalize(r)), 1e-12);
}

TEST(Project, AgreesWithHomogeneousOracle) {
  SplitRng rng(12);
  const auto k = CameraIntrinsics::make(700, 690, 310, 250, 640, 480);
  for (int i = 0; i < 500; ++i) {
    const Vec3 p(rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(0.1, 40));
    const Pixel a = project(p, k);
    const Vec2 b = oracle::project(p, k);
    EXPECT_NEAR(a.u, b.x(), 1e-9);
    EXPECT_NEAR(a.v, b.y(), 1e-9);
  }
}

}  // namespace
}  // namespace pseudoview
