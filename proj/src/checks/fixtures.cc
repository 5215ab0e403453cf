#include "checks.h"

namespace pseudoview::checks {

Scene demo_scene() {
  Scene s;
  Plane back;
  back.point = {0.0, 0.0, 12.0};
  back.normal = {0.0, 0.0, -1.0};
  back.texture.kind = Texture::Kind::kSinusoid;
  back.texture.cell_size = 1.6;
  back.texture.color_a = {0.85f, 0.75f, 0.55f};
  back.texture.color_b = {0.15f, 0.30f, 0.45f};
  s.planes.push_back(back);

  Plane panel;
  panel.point = {0.3, 0.1, 6.0};
  panel.normal = {0.0, 0.0, -1.0};
  panel.texture.kind = Texture::Kind::kCheckerboard;
  panel.texture.cell_size = 0.4;
  panel.texture.color_a = {0.9f, 0.2f, 0.2f};
  panel.texture.color_b = {0.95f, 0.95f, 0.9f};
  panel.half_extent = Vec2(1.2, 0.9);
  s.planes.push_back(panel);
  return s;
}

CameraView demo_camera(int width, int height) {
  const double f = 0.9375 * width;
  return {CameraIntrinsics::make(f, f, (width - 1) / 2.0, (height - 1) / 2.0, width, height),
          Pose::identity()};
}

CascadeConfig demo_cascade_config() {
  CascadeConfig c;
  c.total_iterations = 40;
  c.warmup_iterations = 10;
  c.warp_steps = {10, 25};
  c.views_per_round = 3;
  c.input_view_count = 1;
  c.budget = WarpBudget::make(16.0, 1.0);
  c.directions = {Vec3::UnitX(), -Vec3::UnitX()};
  return c;
}

}  // namespace pseudoview::checks
