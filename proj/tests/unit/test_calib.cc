#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "oracles.h"
#include "pseudoview/calib.h"
#include "pseudoview/error.h"
#include "pseudoview/parallel.h"

namespace pseudoview {
namespace {

std::vector<Pair> exact_pairs(const CalibParams& p, int n, double d_lo, double d_hi) {
  std::vector<Pair> out;
  for (int i = 0; i < n; ++i) {
    const double d = d_lo + (d_hi - d_lo) * i / (n - 1);
    out.push_back({p.depth(d), d, i / 40, i % 40});
  }
  return out;
}

TEST(Huber, Branches) {
  EXPECT_EQ(huber_loss(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(huber_loss(0.5, 1), 0.125);
  EXPECT_DOUBLE_EQ(huber_loss(3, 1), 2.5);
  EXPECT_DOUBLE_EQ(huber_loss(-3, 1), 2.5);
  EXPECT_DOUBLE_EQ(huber_loss(1, 1), 0.5);
}

TEST(BuildPairs, CountsValidLidarPixels) {
  DepthImage lidar(40, 30);
  DisparityImage disp(40, 30);
  for (std::size_t i = 0; i < disp.size(); ++i) disp.set(i, 10.0f);
  for (int i = 0; i < 100; ++i) lidar.set(static_cast<std::size_t>(i * 7), 5.0f);
  EXPECT_EQ(build_pairs(lidar, disp).size(), 100u);
  EXPECT_THROW(build_pairs(DepthImage(40, 30), disp), ValidationError);
}

TEST(BuildPairs, CapIsDeterministic) {
  DepthImage lidar(1000, 1000);
  DisparityImage disp(1000, 1000);
  for (std::size_t i = 0; i < disp.size(); ++i) {
    lidar.set(i, 3.0f);
    disp.set(i, 1.0f);
  }
  PairOptions o;
  o.seed = 5;
  const auto a = build_pairs(lidar, disp, o);
  const auto b = build_pairs(lidar, disp, o);
  ASSERT_EQ(a.size(), 50'000u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].row, b[i].row);
    EXPECT_EQ(a[i].col, b[i].col);
  }
}

TEST(ApplyCalibration, Examples) {
  DisparityImage d(3, 1);
  d.set(0, 8.0f);
  d.set(1, -2.0f);
  d.set(2, 4.0f);
  const DepthImage out = apply_calibration(d, {500, 2, 1});
  EXPECT_DOUBLE_EQ(out.value(0), 51.0);
  EXPECT_FALSE(out.valid(1));
  EXPECT_EQ(out.value(2), static_cast<float>(500.0 / 6.0 + 1.0));
  const DepthImage classical = apply_calibration(d, {389.6, 0, 0});
  EXPECT_EQ(classical.value(0), static_cast<float>(389.6 / 8.0));
}

TEST(InitialGuess, ExactClassical) {
  const auto pairs = exact_pairs({500, 0, 0}, 200, 5, 50);
  EXPECT_NEAR(initial_guess(pairs).c1, 500.0, 1e-9);
}

TEST(InitialGuess, CloseEnoughForGeneralModel) {
  const auto pairs = exact_pairs({500, 2, 1}, 1000, 5, 50);
  EXPECT_NEAR(initial_guess(pairs).c1, 500.0, 150.0);
}

TEST(InitialGuess, ConstantPairsDeterministic) {
  const std::vector<Pair> pairs(60, Pair{4.0, 2.0, 0, 0});
  const CalibParams a = initial_guess(pairs);
  const CalibParams b = initial_guess(pairs);
  EXPECT_EQ(a, b);
  EXPECT_DOUBLE_EQ(a.c1, 8.0);
}

TEST(FitCalibration, ExactRecovery) {
  const CalibParams truth{500, 2, 1};
  const FitReport r = fit_calibration(exact_pairs(truth, 1000, 5, 50));
  EXPECT_TRUE(r.converged);
  EXPECT_LT(oracle::relative_param_error(r.params, truth), 1e-6);
  EXPECT_LT(r.inlier_rmse, 1e-8);
}

TEST(FitCalibration, ClassicalSpecialCase) {
  const CalibParams truth{0.54 * 721.5377, 0, 0};
  const FitReport r = fit_calibration(exact_pairs(truth, 500, 2, 80));
  EXPECT_NEAR(r.params.c1, truth.c1, 1e-9 * truth.c1);
  EXPECT_NEAR(r.params.c2, 0.0, 1e-9);
  EXPECT_NEAR(r.params.c3, 0.0, 1e-9);
}

TEST(FitCalibration, RandomDrawsRecover) {
  SplitRng rng(41);
  for (int i = 0; i < 10; ++i) {
    const oracle::CalibDraw draw = oracle::wide_calib_draw(rng, 60);
    const auto pairs = oracle::calibration_pairs(draw.truth, 2000, draw.d_max, rng);
    const FitReport r = fit_calibration(pairs);
    EXPECT_LT(oracle::relative_param_error(r.params, draw.truth), 1e-5);
  }
}

TEST(FitCalibration, RankDeficient) {
  const std::vector<Pair> pairs(60, Pair{4.0, 2.0, 0, 0});
  EXPECT_THROW(fit_calibration(pairs), NumericalError);
}

TEST(FitCalibration, HuberResistsOutliers) {
  SplitRng rng(42);
  const CalibParams truth{800, 1, 0.5};
  auto pairs = oracle::calibration_pairs(truth, 2000, 40, rng);
  for (std::size_t i = 0; i < pairs.size(); i += 10) pairs[i].lidar_depth *= 2.5;
  const FitReport huber = fit_calibration(pairs);
  FitOptions ls;
  ls.delta = std::numeric_limits<double>::infinity();
  const FitReport plain = fit_calibration(pairs, ls);
  EXPECT_LT(oracle::relative_param_error(huber.params, truth), 0.01);
  EXPECT_LT(oracle::relative_param_error(huber.params, truth),
            oracle::relative_param_error(plain.params, truth));
}

TEST(FitCalibration, ConvergedMeansSmallGradient) {
  SplitRng rng(43);
  auto pairs = oracle::calibration_pairs({300, 0.5, -1}, 1500, 30, rng);
  for (auto& p : pairs) p.lidar_depth += rng.uniform(-0.05, 0.05);
  FitOptions o;
  const FitReport r = fit_calibration(pairs, o);
  ASSERT_TRUE(r.converged);
  EXPECT_LT(r.gradient_norm, o.gradient_tol * std::max(1.0, r.objective));
  EXPECT_LE(r.residual_percentiles[0], r.residual_percentiles[1]);
  EXPECT_LE(r.residual_percentiles[1], r.residual_percentiles[2]);
}

TEST(FitCalibration, IterationCapIsNotConvergence) {
  SplitRng rng(47);
  const auto pairs = oracle::calibration_pairs({900, 2, 1}, 500, 40, rng);
  FitOptions o;
  o.max_iterations = 1;
  const FitReport r = fit_calibration(pairs, o, CalibParams{300, 0, 0});
  EXPECT_FALSE(r.converged);
}

TEST(FitCalibration, ObjectiveDoesNotIncrease) {
  SplitRng rng(44);
  auto pairs = oracle::calibration_pairs({1200, 3, 2}, 1500, 50, rng);
  for (std::size_t i = 0; i < pairs.size(); i += 7) pairs[i].lidar_depth *= 0.4;
  const CalibParams init = initial_guess(pairs);
  double prev = calib_objective(init, pairs, 0.5);
  for (int iters = 1; iters <= 25; ++iters) {
    FitOptions o;
    o.max_iterations = iters;
    const FitReport r = fit_calibration(pairs, o, init);
    EXPECT_LE(r.objective, prev * (1 + 1e-12)) << iters;
    prev = r.objective;
  }
}

TEST(Jacobian, MatchesCentralDifferences) {
  SplitRng rng(45);
  for (int i = 0; i < 100; ++i) {
    const CalibParams p = oracle::wide_calib_draw(rng, 60).truth;
    const double d = rng.uniform(1.0 - std::min(p.c2, 0.0), 60.0);
    const double z = rng.uniform(1, 50);
    const auto j = calib_jacobian(p, d);
    for (int c = 0; c < 3; ++c) {
      CalibParams hi = p, lo = p;
      double* hv = c == 0 ? &hi.c1 : c == 1 ? &hi.c2 : &hi.c3;
      double* lv = c == 0 ? &lo.c1 : c == 1 ? &lo.c2 : &lo.c3;
      const double h = 1e-6 * std::max(1.0, std::fabs(*hv));
      *hv += h;
      *lv -= h;
      const double fd = (calib_residual(hi, z, d) - calib_residual(lo, z, d)) / (2 * h);
      EXPECT_NEAR(j[static_cast<std::size_t>(c)], fd, 1e-5 * std::max(1.0, std::fabs(fd)));
    }
  }
}

TEST(CalibObjective, ParallelMatchesReference) {
  SplitRng rng(46);
  const auto pairs = oracle::calibration_pairs({700, 1, 0}, 20'000, 40, rng);
  const CalibParams p{650, 1.2, 0.3};
  EXPECT_NEAR(calib_objective(p, pairs, 0.5), reference::calib_objective(p, pairs, 0.5),
              1e-9 * reference::calib_objective(p, pairs, 0.5));
  double one, four;
  {
    ThreadLimit l(1);
    one = calib_objective(p, pairs, 0.5);
  }
  {
    ThreadLimit l(4);
    four = calib_objective(p, pairs, 0.5);
  }
  EXPECT_EQ(one, four);
}

}  // namespace
}  // namespace pseudoview
