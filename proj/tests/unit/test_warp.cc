#include <gtest/gtest.h>

#include <cmath>

#include "checks.h"
#include "oracles.h"
#include "pseudoview/error.h"
#include "pseudoview/parallel.h"
#include "pseudoview/scene.h"
#include "pseudoview/warp.h"

namespace pseudoview {
namespace {

const CameraIntrinsics kSmall = CameraIntrinsics::make(30, 30, 15.5, 15.5, 32, 32);

Pose shift(double tx, double ty, double tz) {
  return Pose::make(Mat3::Identity(), Vec3(tx, ty, tz));
}

TEST(ForwardWarpPoint, Basics) {
  const Vec3 p(0.5, -1, 3);
  EXPECT_EQ(forward_warp_point(p, Pose::identity()), p);
  EXPECT_EQ(forward_warp_point(Vec3(0, 0, 10), shift(1, 0, 0)), Vec3(1, 0, 10));
  SplitRng rng(4);
  for (int i = 0; i < 100; ++i) {
    const Vec3 axis = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), 1).normalized();
    const Pose rel = Pose::make(axis_angle(axis, rng.uniform(-1, 1)),
                                Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)));
    const Vec3 q(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(1, 9));
    EXPECT_LT((rel.inverse().apply(forward_warp_point(q, rel)) - q).norm(), 1e-9);
  }
}

TEST(ForwardWarp, IdentityIsLossless) {
  SplitRng rng(1);
  const ColorImage img = oracle::random_image(32, 32, rng);
  const DepthImage depth = oracle::random_depth(32, 32, 2.0, 0.1, rng);
  const WarpOutput w = forward_warp(img, depth, kSmall, Pose::identity());
  for (std::size_t i = 0; i < img.size(); ++i) {
    if (!depth.valid(i)) continue;
    EXPECT_FALSE(w.hole_mask[i]);
    EXPECT_EQ(w.image[i], img[i]);
    EXPECT_EQ(w.depth.value(i), depth.value(i));
  }
}

TEST(ForwardWarp, HoleMaskPartitionsValidity) {
  SplitRng rng(2);
  const ColorImage img = oracle::random_image(32, 32, rng);
  const DepthImage depth = oracle::random_depth(32, 32, 2.0, 0.05, rng);
  const WarpOutput w = forward_warp(img, depth, kSmall, shift(0.13, -0.07, 0.05));
  for (std::size_t i = 0; i < img.size(); ++i) {
    EXPECT_NE(w.hole_mask[i] != 0, w.depth.valid(i));
    if (w.hole_mask[i]) {
      EXPECT_EQ(w.image[i], (Rgb{0, 0, 0}));
    }
  }
}

TEST(ForwardWarp, NearerSurfaceWins) {
  // Two source pixels land on the same target pixel: depth 2 at x = 10 moves
  // by 30 * 0.2 / 2 = 3 px, depth 5 at x = 13 does not reach past 14.2.
  ColorImage img(32, 32, Rgb{0.5f, 0.5f, 0.5f});
  DepthImage depth(32, 32);
  for (int x = 0; x < 32; ++x) depth.set(x, 16, 50.0f);
  depth.set(10, 16, 2.0f);
  img.at(10, 16) = Rgb{1, 0, 0};
  depth.set(12, 16, 5.0f);
  img.at(12, 16) = Rgb{0, 0, 1};
  // 5 m moves by 30 * 0.2 / 5 = 1.2 px -> 13.2; 2 m moves by 3 -> 13.
  const WarpOutput w = forward_warp(img, depth, kSmall, shift(0.2, 0, 0));
  EXPECT_FLOAT_EQ(w.depth.value(13, 16), 2.0f);
  EXPECT_EQ(w.image.at(13, 16), (Rgb{1, 0, 0}));
}

TEST(ForwardWarp, MatchesBruteForceScatter) {
  SplitRng rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const ColorImage img = oracle::random_image(32, 32, rng);
    const DepthImage depth = oracle::random_depth(32, 32, 1.5, 0.1, rng);
    const Pose rel = shift(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), rng.uniform(-0.1, 0.1));
    const WarpOutput a = forward_warp(img, depth, kSmall, rel);
    const WarpOutput b = oracle::brute_force_warp(img, depth, kSmall, rel, {});
    EXPECT_EQ(a.hole_mask, b.hole_mask);
    EXPECT_EQ(a.depth, b.depth);
    for (std::size_t i = 0; i < a.image.size(); ++i) {
      for (int c = 0; c < 3; ++c) EXPECT_NEAR(a.image[i][c], b.image[i][c], 1e-6);
    }
  }
}

TEST(ForwardWarp, ParallelMatchesReference) {
  SplitRng rng(8);
  const auto k = CameraIntrinsics::make(150, 150, 79.5, 59.5, 160, 120);
  const ColorImage img = oracle::random_image(160, 120, rng);
  const DepthImage depth = oracle::random_depth(160, 120, 1.0, 0.05, rng);
  const Pose rel = Pose::make(axis_angle(Vec3::UnitY(), 0.02), Vec3(0.05, 0.02, -0.03));
  const WarpOutput a = forward_warp(img, depth, k, rel);
  const WarpOutput b = reference::forward_warp(img, depth, k, rel);
  EXPECT_EQ(a.image, b.image);
  EXPECT_EQ(a.depth, b.depth);
  EXPECT_EQ(a.hole_mask, b.hole_mask);
}

TEST(ForwardWarp, ThreadCountDoesNotChangeOutput) {
  SplitRng rng(9);
  const auto k = CameraIntrinsics::make(150, 150, 79.5, 59.5, 160, 120);
  const ColorImage img = oracle::random_image(160, 120, rng);
  const DepthImage depth = oracle::random_depth(160, 120, 1.0, 0.05, rng);
  const Pose rel = shift(0.04, 0.01, 0.02);
  WarpOutput one, many;
  {
    ThreadLimit limit(1);
    one = forward_warp(img, depth, k, rel);
  }
  {
    ThreadLimit limit(4);
    many = forward_warp(img, depth, k, rel);
  }
  EXPECT_EQ(one.image, many.image);
  EXPECT_EQ(one.depth, many.depth);
}

TEST(ForwardWarp, DimensionMismatch) {
  EXPECT_THROW(forward_warp(ColorImage(32, 32), DepthImage(31, 32), kSmall, Pose::identity()),
               ValidationError);
}

TEST(HoleFraction, Endpoints) {
  SplitRng rng(3);
  const ColorImage img = oracle::random_image(32, 32, rng);
  const DepthImage full = DepthImage::constant(32, 32, 4.0f);
  EXPECT_EQ(hole_fraction(forward_warp(img, full, kSmall, Pose::identity())), 0.0);
  EXPECT_EQ(hole_fraction(forward_warp(img, DepthImage(32, 32), kSmall, Pose::identity())), 1.0);
}

TEST(HoleFraction, FrustumBand) {
  // Fronto-parallel plane at 10 m shifted by 7 px uncovers a 7 column band.
  const auto k = CameraIntrinsics::make(100, 100, 31.5, 23.5, 64, 48);
  const ColorImage img(64, 48, Rgb{0.3f, 0.6f, 0.9f});
  const DepthImage depth = DepthImage::constant(64, 48, 10.0f);
  const WarpOutput w = forward_warp(img, depth, k, shift(-0.7, 0, 0));
  EXPECT_NEAR(hole_fraction(w), 7.0 / 64.0, 1e-12);
  for (int y = 0; y < 48; ++y) {
    for (int x = 0; x < 64; ++x) EXPECT_EQ(w.hole_mask.at(x, y) != 0, x >= 57);
  }
}

TEST(ForwardWarp, RoundTripOnSyntheticScene) {
  // Tilted sinusoid plane with a period of about 40 px.
  const auto k = CameraIntrinsics::make(125, 125, 79.5, 59.5, 160, 120);
  Scene scene;
  Plane p;
  p.point = Vec3(0, 0, 10);
  p.normal = Vec3(0.25, -0.1, -1.0).normalized();
  p.texture.kind = Texture::Kind::kSinusoid;
  p.texture.cell_size = 3.2;
  scene.planes.push_back(p);
  const SyntheticSceneRenderer renderer(scene);
  const Pose target = Pose::make(Mat3::Identity(), Vec3(0.31, 0.17, 0.05));
  const RenderOutput src = renderer.render(Pose::identity(), k);
  const WarpOutput there = forward_warp(src.image, src.depth, k, relative_pose(Pose::identity(), target));
  const WarpOutput back = forward_warp(there.image, there.depth, k, relative_pose(target, Pose::identity()));
  double sum = 0.0;
  std::size_t n = 0, within = 0;
  for (std::size_t i = 0; i < back.image.size(); ++i) {
    if (back.hole_mask[i]) continue;
    double worst = 0.0;
    for (int c = 0; c < 3; ++c) {
      const double e = std::fabs(double(back.image[i][c]) - double(src.image[i][c]));
      sum += e / 3.0;
      worst = std::max(worst, e);
    }
    within += worst <= 1.0 / 255.0;
    ++n;
  }
  ASSERT_GT(n, back.image.size() / 2);
  EXPECT_LE(sum / double(n), 2.0 / 255.0);
  EXPECT_GE(double(within) / double(n), 0.95);
}

}  // namespace
}  // namespace pseudoview
