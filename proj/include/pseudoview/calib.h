#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "pseudoview/image.h"

namespace pseudoview {

// Generalized disparity-to-depth model: depth = c1 / (d + c2) + c3.
// With c2 = c3 = 0 this is the classical depth = (b f) / d with c1 = b f.
struct CalibParams {
  double c1 = 1.0;
  double c2 = 0.0;
  double c3 = 0.0;

  double depth(double disparity) const { return c1 / (disparity + c2) + c3; }
  std::array<double, 3> as_array() const { return {c1, c2, c3}; }
  bool operator==(const CalibParams&) const = default;
};

// |d + c2| below this is treated as the model's pole.
inline constexpr double kPoleGuard = 1e-6;

struct Pair {
  double lidar_depth = 0.0;
  double disparity = 0.0;
  int row = 0;  // i
  int col = 0;  // j
};

struct PairOptions {
  std::size_t min_pairs = 50;
  std::size_t max_pairs = 50'000;
  std::uint64_t seed = 0;
};

// One pair per pixel with valid LiDAR depth and valid disparity, in raster
// order, thinned to max_pairs by a uniform stride whose phase is drawn from
// the seed. Throws ValidationError with fewer than min_pairs candidates.
std::vector<Pair> build_pairs(const DepthImage& lidar_depth,
                              const DisparityImage& disparity,
                              const PairOptions& options = {});

double huber_loss(double r, double delta);
// d/dr of huber_loss.
double huber_influence(double r, double delta);

// lidar - model(d).
double calib_residual(const CalibParams& p, double lidar_depth, double disparity);
// d residual / d (c1, c2, c3).
std::array<double, 3> calib_jacobian(const CalibParams& p, double disparity);

// c2 = c3 = 0, c1 = median of lidar_depth * disparity.
CalibParams initial_guess(const std::vector<Pair>& pairs);

struct FitOptions {
  double delta = 0.5;  // Huber threshold, meters; +inf gives least squares
  int max_iterations = 200;
  double relative_decrease_tol = 1e-10;
  double gradient_tol = 1e-8;  // scaled by max(1, objective)
  double initial_damping = 1e-3;
};

struct FitReport {
  CalibParams params;
  double objective = 0.0;
  double gradient_norm = 0.0;  // infinity norm at params
  double inlier_rmse = 0.0;    // over pairs with |r| <= delta
  std::size_t inlier_count = 0;
  int iterations = 0;
  bool converged = false;
  std::array<double, 3> residual_percentiles{};  // p50, p90, p99 of |r|
};

// Huber objective sum over pairs.
double calib_objective(const CalibParams& p, const std::vector<Pair>& pairs,
                       double delta);

// Damped Gauss-Newton on the Huber objective (IRLS weights) with
// Levenberg-style damping. Steps that move c2 across the pole of any pair are
// rejected. Throws NumericalError when all disparities are identical.
// Non-convergence is reported through FitReport::converged.
FitReport fit_calibration(const std::vector<Pair>& pairs, const FitOptions& options = {},
                          const std::optional<CalibParams>& init = std::nullopt);

// Per-pixel c1 / (d + c2) + c3. Pixels at the pole, with invalid disparity, or
// with non-positive result come out invalid. Throws ValidationError if c1 == 0.
DepthImage apply_calibration(const DisparityImage& disparity, const CalibParams& params);

namespace reference {
// Serial evaluation of the objective.
double calib_objective(const CalibParams& p, const std::vector<Pair>& pairs,
                       double delta);
}  // namespace reference

}  // namespace pseudoview
