#pragma once

// Independent reference computations used by the acceptance checks and the
// unit tests. None of these call the kernels they are compared against.

#include <vector>

#include "pseudoview/calib.h"
#include "pseudoview/geometry.h"
#include "pseudoview/image.h"
#include "pseudoview/rng.h"
#include "pseudoview/scene.h"
#include "pseudoview/warp.h"

namespace pseudoview::oracle {

// x_h / z form of the pinhole model.
Vec2 project(const Vec3& p, const CameraIntrinsics& k);

// project(p + dt) - project(p).
Vec2 displacement(const Vec3& p, const Vec3& dt, const CameraIntrinsics& k);

// SSIM with the 11x11 window built directly in 2D and centered second
// moments; mean over pixels and channels.
double ssim_mean(const ColorImage& a, const ColorImage& b);

double mean_abs_difference(const ColorImage& a, const ColorImage& b);

// Forward warp by brute force: every target pixel scans all source pixels
// for splats landing on it. Weights are written as (1 - |du|)(1 - |dv|).
WarpOutput brute_force_warp(const ColorImage& src_image, const DepthImage& src_depth,
                            const CameraIntrinsics& k, const Pose& rel,
                            const WarpOptions& options);

// Per-pixel ray-plane intersection, nearest hit, without the scene module.
struct RayOracleHit {
  bool hit = false;
  double depth = 0.0;
  int plane = -1;
};
RayOracleHit nearest_plane(const Scene& scene, const Pose& pose, const CameraIntrinsics& k,
                           double u, double v);

// Smooth random depth field with values >= z_min; about invalid_fraction of
// the pixels are invalid. At least one valid pixel sits exactly at z_min.
DepthImage random_depth(int width, int height, double z_min, double invalid_fraction,
                        SplitRng& rng);

ColorImage random_image(int width, int height, SplitRng& rng);

// Calibration pairs depth = c1 / (d + c2) + c3 with d + c2 >= 1 and d >= 1.
std::vector<Pair> calibration_pairs(const CalibParams& truth, std::size_t n, double d_max,
                                    SplitRng& rng);

// Parameters from c1 in [10, 1e4] (log-uniform), c2 in [-1, 5], c3 in [-5, 5],
// redrawn until disparities in [max(1, 1 - c2), d_max] with d_max <= d_cap
// span at least 5 units and keep every depth >= 0.1.
struct CalibDraw {
  CalibParams truth;
  double d_max = 0.0;
};
CalibDraw wide_calib_draw(SplitRng& rng, double d_cap);

double relative_param_error(const CalibParams& est, const CalibParams& truth);

}  // namespace pseudoview::oracle
