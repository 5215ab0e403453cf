#include "pseudoview/bounds.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pseudoview/error.h"

namespace pseudoview {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Relative slack on the budget comparison; covers rounding when a translation
// sits exactly on a bound.
constexpr double kBudgetSlack = 1e-12;

bool within_budget(double max_disp, double epsilon) {
  return max_disp <= epsilon * (1.0 + kBudgetSlack);
}

void check_depth_shape(const DepthImage& d, const CameraIntrinsics& k) {
  if (d.width() != k.width || d.height() != k.height) {
    throw ValidationError("certify_pose: depth " + shape_string(d.width(), d.height()) +
                          " does not match intrinsics " + shape_string(k.width, k.height));
  }
}

}  // namespace

WarpBudget WarpBudget::make(double epsilon, double z_min, double fixed_t_z) {
  WarpBudget b{epsilon, z_min, fixed_t_z};
  b.validate();
  return b;
}

void WarpBudget::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ValidationError("warp budget: epsilon must be positive, got " + std::to_string(epsilon));
  }
  if (!(z_min > 0.0) || !std::isfinite(z_min)) {
    throw ValidationError("warp budget: z_min must be positive, got " + std::to_string(z_min));
  }
  if (!std::isfinite(fixed_t_z)) throw ValidationError("warp budget: t_z must be finite");
}

double Displacement::linf() const { return std::max(std::abs(du), std::abs(dv)); }

Displacement pixel_displacement_homogeneous(double xh, double yh, double z, const Vec3& dt,
                                            const CameraIntrinsics& k) {
  const double tz = dt.z();
  const double denom = z * (z + tz);
  return {(k.fx * dt.x() * z + k.cx * tz * z - tz * xh) / denom,
          (k.fy * dt.y() * z + k.cy * tz * z - tz * yh) / denom};
}

Displacement pixel_displacement(const Point3& p, const Vec3& dt, const CameraIntrinsics& k) {
  if (!(p.z() > 0.0)) {
    throw GeometryError("pixel_displacement: point depth must be positive, got " +
                        std::to_string(p.z()));
  }
  if (!(p.z() + dt.z() > 0.0)) {
    throw GeometryError("pixel_displacement: point passes behind the target camera (z + t_z = " +
                        std::to_string(p.z() + dt.z()) + ")");
  }
  // Homogeneous pixel coordinates of p: K p = (u z, v z, z).
  const double xh = k.fx * p.x() + k.cx * p.z();
  const double yh = k.fy * p.y() + k.cy * p.z();
  return pixel_displacement_homogeneous(xh, yh, p.z(), dt, k);
}

TranslationBounds solve_bounds_lateral(const WarpBudget& budget, const CameraIntrinsics& k) {
  budget.validate();
  k.validate();
  return {budget.epsilon * budget.z_min / k.fx, budget.epsilon * budget.z_min / k.fy, 0.0};
}

SceneExtent SceneExtent::from_intrinsics(const CameraIntrinsics& k) {
  return {static_cast<double>(k.width - 1), static_cast<double>(k.height - 1)};
}

TranslationBounds solve_bounds_with_tz(const WarpBudget& budget, const CameraIntrinsics& k) {
  return solve_bounds_with_tz(budget, k, SceneExtent::from_intrinsics(k));
}

TranslationBounds solve_bounds_with_tz(const WarpBudget& budget, const CameraIntrinsics& k,
                                       const SceneExtent& extent) {
  budget.validate();
  k.validate();
  const double tz = budget.fixed_t_z;
  if (tz == 0.0) {
    throw ValidationError("solve_bounds_with_tz: t_z = 0 belongs to the lateral regime");
  }
  if (!(budget.z_min + tz > 0.0)) {
    throw ValidationError("solve_bounds_with_tz: z_min + t_z must be positive, got " +
                          std::to_string(budget.z_min + tz));
  }
  if (!(extent.u_max >= 0.0) || !(extent.v_max >= 0.0)) {
    throw ValidationError("solve_bounds_with_tz: scene extent must be non-negative");
  }
  // |du| = |fx t_x + (cx - u) t_z| / (z + t_z) is largest at z = z_min and at
  // the extent edge farthest from the principal point; the same holds for v.
  const double reach_u = std::max(k.cx, extent.u_max - k.cx);
  const double reach_v = std::max(k.cy, extent.v_max - k.cy);
  const double slack = budget.epsilon * (budget.z_min + tz);
  const double max_tx = (slack - std::abs(tz) * reach_u) / k.fx;
  const double max_ty = (slack - std::abs(tz) * reach_v) / k.fy;
  if (!(max_tx > 0.0) || !(max_ty > 0.0)) {
    throw ValidationError("solve_bounds_with_tz: t_z = " + std::to_string(tz) +
                          " alone exhausts the pixel budget");
  }
  return {max_tx, max_ty, tz};
}

Certification certify_pose(const DepthImage& src_depth, const CameraIntrinsics& k,
                           const Vec3& dt, double epsilon) {
  check_depth_shape(src_depth, k);
  const int w = src_depth.width();
  const int h = src_depth.height();
  double max_disp = 0.0;
  int behind = 0;
#pragma omp parallel for schedule(static) reduction(max : max_disp) reduction(| : behind)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (!src_depth.valid(i)) continue;
      const double z = src_depth.value(i);
      if (!(z + dt.z() > 0.0)) {
        behind = 1;
        continue;
      }
      const double d = pixel_displacement_homogeneous(x * z, y * z, z, dt, k).linf();
      if (d > max_disp) max_disp = d;
    }
  }
  if (behind) return {false, kInf};
  return {within_budget(max_disp, epsilon), max_disp};
}

Certification certify_pose(const DepthImage& src_depth, const CameraIntrinsics& k,
                           const Pose& rel, double epsilon, CertifyMode mode) {
  if (mode == CertifyMode::kClosedForm) {
    if (!rel.is_pure_translation()) {
      throw ValidationError(
          "certify_pose: the closed-form displacement has no rotation terms; use "
          "CertifyMode::kFullPipeline for rotated poses");
    }
    return certify_pose(src_depth, k, rel.translation, epsilon);
  }
  check_depth_shape(src_depth, k);
  const int w = src_depth.width();
  const int h = src_depth.height();
  double max_disp = 0.0;
  int behind = 0;
#pragma omp parallel for schedule(static) reduction(max : max_disp) reduction(| : behind)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (!src_depth.valid(i)) continue;
      const double z = src_depth.value(i);
      const Point3 q = rel.apply(unproject({static_cast<double>(x), static_cast<double>(y)}, z, k));
      if (!(q.z() > 0.0)) {
        behind = 1;
        continue;
      }
      const Pixel p = project(q, k);
      const double d = std::max(std::abs(p.u - x), std::abs(p.v - y));
      if (d > max_disp) max_disp = d;
    }
  }
  if (behind) return {false, kInf};
  return {within_budget(max_disp, epsilon), max_disp};
}

Certification certify_bounds(const DepthImage& src_depth, const CameraIntrinsics& k,
                             const TranslationBounds& bounds, double epsilon) {
  Certification worst{true, 0.0};
  for (double sx : {-1.0, 1.0}) {
    for (double sy : {-1.0, 1.0}) {
      const Certification c = certify_pose(
          src_depth, k, Vec3(sx * bounds.max_t_x, sy * bounds.max_t_y, bounds.t_z), epsilon);
      worst.ok = worst.ok && c.ok;
      worst.max_disp = std::max(worst.max_disp, c.max_disp);
    }
  }
  return worst;
}

std::optional<TightenedBounds> tighten_bounds(const DepthImage& src_depth,
                                              const CameraIntrinsics& k,
                                              const TranslationBounds& initial, double epsilon,
                                              int max_steps) {
  const auto scaled = [&](double s) {
    return TranslationBounds{initial.max_t_x * s, initial.max_t_y * s, initial.t_z};
  };
  Certification c = certify_bounds(src_depth, k, initial, epsilon);
  if (c.ok) return TightenedBounds{initial, c, 0};
  Certification at_zero = certify_bounds(src_depth, k, scaled(0.0), epsilon);
  if (!at_zero.ok) return std::nullopt;

  double lo = 0.0;
  double hi = 1.0;
  Certification best = at_zero;
  int steps = 0;
  for (; steps < max_steps; ++steps) {
    const double mid = 0.5 * (lo + hi);
    const Certification m = certify_bounds(src_depth, k, scaled(mid), epsilon);
    if (m.ok) {
      lo = mid;
      best = m;
    } else {
      hi = mid;
    }
  }
  return TightenedBounds{scaled(lo), best, steps};
}

Vec3 pseudo_pose_offset(const TranslationBounds& bounds, const Vec3& direction) {
  if (std::abs(direction.norm() - 1.0) > 1e-9) {
    throw ValidationError("generate_pseudo_pose: direction must have unit length, |d| = " +
                          std::to_string(direction.norm()));
  }
  return {direction.x() * bounds.max_t_x, direction.y() * bounds.max_t_y,
          direction.z() * bounds.t_z};
}

Pose generate_pseudo_pose(const Pose& base, const TranslationBounds& bounds,
                          const Vec3& direction) {
  Pose out = base;
  out.translation = base.translation + pseudo_pose_offset(bounds, direction);
  return out;
}

Pose generate_pseudo_pose(const Pose& base, const TranslationBounds& bounds,
                          const Vec2& direction) {
  return generate_pseudo_pose(base, bounds, Vec3(direction.x(), direction.y(), 0.0));
}

namespace reference {

Certification certify_pose(const DepthImage& src_depth, const CameraIntrinsics& k,
                           const Vec3& dt, double epsilon) {
  check_depth_shape(src_depth, k);
  double max_disp = 0.0;
  for (int y = 0; y < src_depth.height(); ++y) {
    for (int x = 0; x < src_depth.width(); ++x) {
      if (!src_depth.valid(x, y)) continue;
      const double z = src_depth.value(x, y);
      if (!(z + dt.z() > 0.0)) return {false, kInf};
      const Point3 p = unproject({static_cast<double>(x), static_cast<double>(y)}, z, k);
      max_disp = std::max(max_disp, pixel_displacement(p, dt, k).linf());
    }
  }
  return {within_budget(max_disp, epsilon), max_disp};
}

}  // namespace reference

}  // namespace pseudoview
