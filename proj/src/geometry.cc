#include "pseudoview/geometry.h"

#include <cmath>
#include <string>

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "pseudoview/error.h"

namespace pseudoview {

CameraIntrinsics CameraIntrinsics::make(double fx, double fy, double cx, double cy,
                                        int width, int height) {
  CameraIntrinsics k{fx, fy, cx, cy, width, height};
  k.validate();
  return k;
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy)) {
    throw ValidationError("intrinsics: focal lengths must be positive and finite (fx=" +
                          std::to_string(fx) + ", fy=" + std::to_string(fy) + ")");
  }
  if (width <= 0 || height <= 0) {
    throw ValidationError("intrinsics: image size must be positive (" +
                          std::to_string(width) + "x" + std::to_string(height) + ")");
  }
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
    throw ValidationError("intrinsics: principal point (" + std::to_string(cx) + ", " +
                          std::to_string(cy) + ") outside the image");
  }
}

Mat3 CameraIntrinsics::matrix() const {
  Mat3 m;
  m << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return m;
}

double rotation_defect(const Mat3& r) {
  const double ortho = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
  return std::max(ortho, std::abs(r.determinant() - 1.0));
}

Mat3 orthonormalize(const Mat3& r) {
  Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  return u * v.transpose();
}

Mat3 axis_angle(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

Pose Pose::make(const Mat3& rotation, const Vec3& translation) {
  Pose p{rotation, translation};
  p.validate();
  return p;
}

void Pose::validate() const {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw ValidationError("pose: non-finite entries");
  }
  const double defect = rotation_defect(rotation);
  if (defect > kRotationTolerance) {
    throw ValidationError("pose: rotation is not orthonormal with det +1 (defect " +
                          std::to_string(defect) + ")");
  }
}

Vec3 Pose::apply(const Vec3& p) const {
  // Written out so every caller (and the warp kernels) rounds the same way.
  const Mat3& r = rotation;
  return Vec3(r(0, 0) * p.x() + r(0, 1) * p.y() + r(0, 2) * p.z() + translation.x(),
              r(1, 0) * p.x() + r(1, 1) * p.y() + r(1, 2) * p.z() + translation.y(),
              r(2, 0) * p.x() + r(2, 1) * p.y() + r(2, 2) * p.z() + translation.z());
}

Pose Pose::inverse() const {
  Pose inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

Pose Pose::operator*(const Pose& rhs) const {
  Pose out;
  out.rotation = rotation * rhs.rotation;
  out.translation = rotation * rhs.translation + translation;
  if (rotation_defect(out.rotation) > kRotationTolerance) {
    out.rotation = orthonormalize(out.rotation);
  }
  return out;
}

bool Pose::is_pure_translation(double tol) const {
  return (rotation - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol;
}

Pixel project(const Point3& p, const CameraIntrinsics& k) {
  if (!(p.z() > 0.0)) {
    throw GeometryError("project: point has non-positive depth z=" + std::to_string(p.z()));
  }
  return {k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy};
}

Point3 unproject(const Pixel& px, double depth, const CameraIntrinsics& k) {
  if (!(depth > 0.0)) {
    throw GeometryError("unproject: depth must be positive, got " + std::to_string(depth));
  }
  return {(px.u - k.cx) / k.fx * depth, (px.v - k.cy) / k.fy * depth, depth};
}

Pose relative_pose(const Pose& source, const Pose& target) {
  // R^-1 = R^T for a valid rotation.
  Pose rel;
  rel.rotation = target.rotation * source.rotation.transpose();
  rel.translation = target.translation - rel.rotation * source.translation;
  if (rotation_defect(rel.rotation) > kRotationTolerance) {
    rel.rotation = orthonormalize(rel.rotation);
  }
  return rel;
}

}  // namespace pseudoview
