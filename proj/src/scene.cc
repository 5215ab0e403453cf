#include "pseudoview/scene.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Geometry>

#include "pseudoview/error.h"

namespace pseudoview {

namespace {

Rgb mix(const Rgb& a, const Rgb& b, double w) {
  Rgb out;
  for (int c = 0; c < 3; ++c) {
    out[c] = static_cast<float>((1.0 - w) * a[c] + w * b[c]);
  }
  return out;
}

int wrap(long long i, int n) {
  const long long m = i % n;
  return static_cast<int>(m < 0 ? m + n : m);
}

}  // namespace

Rgb Texture::sample(double s, double t) const {
  switch (kind) {
    case Kind::kSolid:
      return color_a;
    case Kind::kCheckerboard: {
      const long long a = static_cast<long long>(std::floor(s / cell_size));
      const long long b = static_cast<long long>(std::floor(t / cell_size));
      return ((a + b) & 1) == 0 ? color_a : color_b;
    }
    case Kind::kSinusoid: {
      const double k = 2.0 * std::numbers::pi / cell_size;
      return mix(color_a, color_b, 0.5 + 0.5 * std::sin(k * s) * std::cos(k * t));
    }
    case Kind::kImage: {
      // Texel centers at integer texel coordinates.
      const double x = s / pixel_size;
      const double y = t / pixel_size;
      const double fx = std::floor(x);
      const double fy = std::floor(y);
      const double ax = x - fx;
      const double ay = y - fy;
      const int w = image.width();
      const int h = image.height();
      const int x0 = wrap(static_cast<long long>(fx), w);
      const int x1 = wrap(static_cast<long long>(fx) + 1, w);
      const int y0 = wrap(static_cast<long long>(fy), h);
      const int y1 = wrap(static_cast<long long>(fy) + 1, h);
      Rgb out;
      for (int c = 0; c < 3; ++c) {
        const double top = (1.0 - ax) * image.at(x0, y0)[c] + ax * image.at(x1, y0)[c];
        const double bot = (1.0 - ax) * image.at(x0, y1)[c] + ax * image.at(x1, y1)[c];
        out[c] = static_cast<float>((1.0 - ay) * top + ay * bot);
      }
      return out;
    }
  }
  return color_a;
}

Vec3 Plane::axis_s() const {
  const Vec3 n = normal.normalized();
  const Vec3 ref = std::abs(n.y()) < 0.9 ? Vec3::UnitY() : Vec3::UnitX();
  return ref.cross(n).normalized();
}

Vec3 Plane::axis_t() const { return normal.normalized().cross(axis_s()); }

void Scene::validate() const {
  if (planes.empty()) throw ValidationError("scene: no planes");
  for (std::size_t i = 0; i < planes.size(); ++i) {
    const Plane& p = planes[i];
    const std::string where = "scene: plane " + std::to_string(i);
    if (!p.point.allFinite()) throw ValidationError(where + ": non-finite point");
    if (!p.normal.allFinite() || !(p.normal.norm() > 0.0)) {
      throw ValidationError(where + ": normal must be finite and non-zero");
    }
    if (p.half_extent && !(p.half_extent->x() > 0.0 && p.half_extent->y() > 0.0)) {
      throw ValidationError(where + ": extent must be positive");
    }
    const Texture& t = p.texture;
    if ((t.kind == Texture::Kind::kCheckerboard || t.kind == Texture::Kind::kSinusoid) &&
        !(t.cell_size > 0.0 && std::isfinite(t.cell_size))) {
      throw ValidationError(where + ": cell_size must be positive");
    }
    if (t.kind == Texture::Kind::kImage) {
      if (t.image.empty()) throw ValidationError(where + ": empty texture image");
      if (!(t.pixel_size > 0.0 && std::isfinite(t.pixel_size))) {
        throw ValidationError(where + ": pixel_size must be positive");
      }
    }
  }
}

std::optional<RayHit> trace_pixel(const Scene& scene, const Pose& pose,
                                  const CameraIntrinsics& k, double u, double v) {
  const Vec3 dir_cam((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
  const Vec3 dir = pose.rotation.transpose() * dir_cam;
  const Vec3 origin = pose.camera_center();
  std::optional<RayHit> best;
  double best_depth = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < scene.planes.size(); ++i) {
    const Plane& p = scene.planes[i];
    const double denom = p.normal.dot(dir);
    if (denom == 0.0) continue;
    // dir_cam has unit z, so the ray parameter is the camera-frame depth.
    const double depth = p.normal.dot(p.point - origin) / denom;
    if (!(depth > 1e-9) || !(depth < best_depth)) continue;
    const Vec3 local = origin + depth * dir - p.point;
    const double s = local.dot(p.axis_s());
    const double t = local.dot(p.axis_t());
    if (p.half_extent &&
        (std::abs(s) > p.half_extent->x() || std::abs(t) > p.half_extent->y())) {
      continue;
    }
    best_depth = depth;
    best = RayHit{depth, p.texture.sample(s, t), static_cast<int>(i)};
  }
  return best;
}

SyntheticSceneRenderer::SyntheticSceneRenderer(Scene scene) : scene_(std::move(scene)) {
  scene_.validate();
}

RenderOutput SyntheticSceneRenderer::render(const Pose& pose, const CameraIntrinsics& k) const {
  k.validate();
  pose.validate();
  RenderOutput out{ColorImage(k.width, k.height, Rgb{0.0f, 0.0f, 0.0f}),
                   DepthImage(k.width, k.height)};
  long long hits = 0;
#pragma omp parallel for schedule(static) reduction(+ : hits)
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      const auto hit = trace_pixel(scene_, pose, k, x, y);
      if (!hit) continue;
      const float d = static_cast<float>(hit->depth);
      if (!(d > 0.0f)) continue;
      out.image.at(x, y) = hit->color;
      out.depth.set(x, y, d);
      ++hits;
    }
  }
  if (hits == 0) throw GeometryError("render: no plane is visible in front of the camera");
  return out;
}

void SyntheticSceneRenderer::update(const LossFeedback&) { ++updates_; }

std::string SyntheticSceneRenderer::state_token() const {
  return "synthetic-scene planes=" + std::to_string(scene_.planes.size()) +
         " updates=" + std::to_string(updates_);
}

}  // namespace pseudoview
