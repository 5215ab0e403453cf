#pragma once

#include <cmath>

#include "pseudoview/warp.h"

namespace pseudoview::detail {

// Visits the up-to-four bilinear splats of a warped source pixel in the fixed
// order (x0,y0), (x0+1,y0), (x0,y0+1), (x0+1,y0+1), skipping zero weights and
// targets outside the frame.
template <typename F>
inline void for_each_splat(const SplatSource& s, int width, int height, F&& f) {
  if (!s.ok) return;
  if (!(s.u > -1.0 && s.v > -1.0 && s.u < width && s.v < height)) return;
  const double fx0 = std::floor(s.u);
  const double fy0 = std::floor(s.v);
  const int x0 = static_cast<int>(fx0);
  const int y0 = static_cast<int>(fy0);
  const double ax = s.u - fx0;
  const double ay = s.v - fy0;
  const double wx[2] = {1.0 - ax, ax};
  const double wy[2] = {1.0 - ay, ay};
  for (int dy = 0; dy < 2; ++dy) {
    const int ty = y0 + dy;
    if (ty < 0 || ty >= height || wy[dy] <= 0.0) continue;
    for (int dx = 0; dx < 2; ++dx) {
      const int tx = x0 + dx;
      const double w = wx[dx] * wy[dy];
      if (tx < 0 || tx >= width || w <= 0.0) continue;
      f(tx, ty, w);
    }
  }
}

inline void check_warp_inputs(const ColorImage& img, const DepthImage& depth,
                              const CameraIntrinsics& k, const Pose& rel) {
  require_same_shape(img, depth, "forward_warp: source image vs source depth");
  if (img.width() != k.width || img.height() != k.height) {
    throw ValidationError("forward_warp: source " + shape_string(img.width(), img.height()) +
                          " does not match intrinsics " + shape_string(k.width, k.height));
  }
  k.validate();
  rel.validate();
}

}  // namespace pseudoview::detail
