#pragma once

#include <optional>

#include "pseudoview/geometry.h"
#include "pseudoview/image.h"

namespace pseudoview {

// Pixel-displacement budget for pseudo-view translations.
struct WarpBudget {
  double epsilon = 32.0;  // pixels, L-infinity
  double z_min = 1.0;     // meters, conservative nearest scene depth
  double fixed_t_z = 0.0; // meters, only for the forward/backward regime

  static WarpBudget make(double epsilon, double z_min, double fixed_t_z = 0.0);
  void validate() const;
};

// Admissible |t_x| <= max_t_x, |t_y| <= max_t_y at forward offset t_z.
struct TranslationBounds {
  double max_t_x = 0.0;
  double max_t_y = 0.0;
  double t_z = 0.0;
};

struct Displacement {
  double du = 0.0;
  double dv = 0.0;
  double linf() const;
};

// Closed-form pixel shift of camera-frame point p when the camera translates
// by dt with no rotation. Throws GeometryError when p.z <= 0 or
// p.z + dt.z <= 0.
Displacement pixel_displacement(const Point3& p, const Vec3& dt,
                                const CameraIntrinsics& k);

// Same quantity in homogeneous pixel form: (u*z, v*z, z) for pixel (u, v) at
// depth z. Used by the per-pixel sweeps to avoid an unproject.
Displacement pixel_displacement_homogeneous(double xh, double yh, double z,
                                            const Vec3& dt,
                                            const CameraIntrinsics& k);

// Lateral-only regime: (eps z_min / fx, eps z_min / fy, 0).
TranslationBounds solve_bounds_lateral(const WarpBudget& budget,
                                       const CameraIntrinsics& k);

// Pixel-coordinate extent of the scene: u in [0, u_max], v in [0, v_max].
struct SceneExtent {
  double u_max = 0.0;
  double v_max = 0.0;
  static SceneExtent from_intrinsics(const CameraIntrinsics& k);
};

// Regime with a fixed forward offset t_z != 0. Evaluates the displacement
// inequality at the worst-case pixel of the extent and at z_min. The result
// is an initializer; tighten_bounds() against a depth map is authoritative.
// Throws ValidationError when t_z == 0, z_min + t_z <= 0, or no lateral
// motion is admissible.
TranslationBounds solve_bounds_with_tz(const WarpBudget& budget,
                                       const CameraIntrinsics& k,
                                       const SceneExtent& extent);
TranslationBounds solve_bounds_with_tz(const WarpBudget& budget,
                                       const CameraIntrinsics& k);

struct Certification {
  bool ok = false;
  double max_disp = 0.0;  // +inf when a point passes behind the camera
};

// Which displacement model certify_pose evaluates.
enum class CertifyMode {
  kClosedForm,    // closed-form shift; translation-only poses
  kFullPipeline,  // unproject, rigid transform, project; any rotation
};

// Exhaustive per-pixel check of the L-infinity displacement of every valid
// pixel under translation dt. Parallel max-reduction.
Certification certify_pose(const DepthImage& src_depth, const CameraIntrinsics& k,
                           const Vec3& dt, double epsilon);

// Pose form. In kClosedForm mode a relative rotation that is not the identity
// throws ValidationError.
Certification certify_pose(const DepthImage& src_depth, const CameraIntrinsics& k,
                           const Pose& rel, double epsilon,
                           CertifyMode mode = CertifyMode::kClosedForm);

// Certifies every corner of the bounds box (the displacement is affine in
// each lateral component, so the corners are the extremes).
Certification certify_bounds(const DepthImage& src_depth, const CameraIntrinsics& k,
                             const TranslationBounds& bounds, double epsilon);

struct TightenedBounds {
  TranslationBounds bounds;
  Certification certification;
  int bisection_steps = 0;
};

// Shrinks the lateral magnitudes by bisection on a common scale factor until
// certify_bounds passes. Returns nullopt if even zero lateral motion fails
// (the t_z alone exceeds the budget).
std::optional<TightenedBounds> tighten_bounds(const DepthImage& src_depth,
                                              const CameraIntrinsics& k,
                                              const TranslationBounds& initial,
                                              double epsilon, int max_steps = 60);

// base translated in its own camera frame by direction scaled componentwise
// into the bounds (x by max_t_x, y by max_t_y, z by t_z); rotation unchanged.
// direction must have unit length (2 or 3 components).
Pose generate_pseudo_pose(const Pose& base, const TranslationBounds& bounds,
                          const Vec3& direction);
Pose generate_pseudo_pose(const Pose& base, const TranslationBounds& bounds,
                          const Vec2& direction);

// Camera-frame offset generate_pseudo_pose applies.
Vec3 pseudo_pose_offset(const TranslationBounds& bounds, const Vec3& direction);

namespace reference {
Certification certify_pose(const DepthImage& src_depth, const CameraIntrinsics& k,
                           const Vec3& dt, double epsilon);
}  // namespace reference

}  // namespace pseudoview
