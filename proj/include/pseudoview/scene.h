#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pseudoview/geometry.h"
#include "pseudoview/image.h"
#include "pseudoview/renderer.h"

namespace pseudoview {

struct Texture {
  // kSinusoid blends color_a and color_b by
  // 0.5 + 0.5 sin(2 pi s / cell_size) cos(2 pi t / cell_size).
  enum class Kind { kSolid, kCheckerboard, kSinusoid, kImage };

  Kind kind = Kind::kCheckerboard;
  Rgb color_a{0.9f, 0.9f, 0.9f};
  Rgb color_b{0.1f, 0.1f, 0.1f};
  double cell_size = 0.5;   // meters per checker cell or sinusoid period
  ColorImage image;         // kImage, tiled, bilinear
  double pixel_size = 0.01; // meters per texel for kImage

  // Color at plane coordinates (s, t) in meters.
  Rgb sample(double s, double t) const;
};

struct Plane {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  Texture texture;
  // Half-sizes along the plane's in-plane axes; unbounded when empty.
  std::optional<Vec2> half_extent;

  // In-plane orthonormal axes derived from the normal.
  Vec3 axis_s() const;
  Vec3 axis_t() const;
};

struct Scene {
  std::vector<Plane> planes;
  void validate() const;
};

// Static ground-truth back end: exact nearest-plane color and depth per pixel
// by ray-plane intersection. update() only counts calls.
class SyntheticSceneRenderer final : public Renderer {
 public:
  explicit SyntheticSceneRenderer(Scene scene);

  // Throws GeometryError when no pixel sees any plane in front of the camera.
  RenderOutput render(const Pose& pose, const CameraIntrinsics& k) const override;
  void update(const LossFeedback& feedback) override;
  std::string state_token() const override;

  const Scene& scene() const { return scene_; }
  int update_count() const { return updates_; }

 private:
  Scene scene_;
  int updates_ = 0;
};

// Nearest intersection along the ray through pixel (u, v); depth is the
// camera-frame z of the hit. nullopt when no plane is hit in front.
struct RayHit {
  double depth = 0.0;
  Rgb color{};
  int plane = -1;
};
std::optional<RayHit> trace_pixel(const Scene& scene, const Pose& pose,
                                  const CameraIntrinsics& k, double u, double v);

}  // namespace pseudoview
