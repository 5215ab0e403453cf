#pragma once

#include <Eigen/Core>

namespace pseudoview {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// A point in some camera frame, meters.
using Point3 = Vec3;

// Image coordinates in pixels. Pixel centers sit at integer coordinates.
struct Pixel {
  double u = 0.0;
  double v = 0.0;
};

// Pinhole intrinsics. Construct through make() to get validation.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  // Throws ValidationError unless fx, fy > 0, 0 <= cx < width, 0 <= cy < height.
  static CameraIntrinsics make(double fx, double fy, double cx, double cy,
                               int width, int height);
  void validate() const;

  Mat3 matrix() const;
  bool operator==(const CameraIntrinsics&) const = default;
};

// Rigid world-to-camera transform: x_cam = rotation * x_world + translation.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return {}; }
  // Throws ValidationError when the rotation is not orthonormal with
  // determinant +1 to within kRotationTolerance.
  static Pose make(const Mat3& rotation, const Vec3& translation);
  void validate() const;

  Vec3 apply(const Vec3& p) const;
  Pose inverse() const;
  // (a * b).apply(p) == a.apply(b.apply(p)).
  Pose operator*(const Pose& rhs) const;
  Vec3 camera_center() const { return -rotation.transpose() * translation; }
  bool is_pure_translation(double tol = 1e-12) const;

  bool operator==(const Pose& o) const {
    return rotation == o.rotation && translation == o.translation;
  }
};

inline constexpr double kRotationTolerance = 1e-9;

// Largest entry of |R^T R - I| and |det R - 1|.
double rotation_defect(const Mat3& r);
// Nearest rotation in the Frobenius sense (polar decomposition via SVD).
Mat3 orthonormalize(const Mat3& r);
// Rotation about a unit axis (Rodrigues).
Mat3 axis_angle(const Vec3& axis, double angle);

// Throws GeometryError when p.z() <= 0. The result may lie outside the image.
Pixel project(const Point3& p, const CameraIntrinsics& k);
// Throws GeometryError when depth <= 0.
Point3 unproject(const Pixel& px, double depth, const CameraIntrinsics& k);

// Transform taking source-camera coordinates to target-camera coordinates:
// rotation R' R^-1, translation T' - R' R^-1 T.
Pose relative_pose(const Pose& source, const Pose& target);

}  // namespace pseudoview
