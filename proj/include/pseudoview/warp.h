#pragma once

#include "pseudoview/geometry.h"
#include "pseudoview/image.h"

namespace pseudoview {

struct WarpOptions {
  // Splats whose depth is within depth_band * (nearest depth) of the nearest
  // splat at a target pixel are blended; farther ones are occluded.
  double depth_band = 0.01;
  // Target pixels whose blended splat weight is below this are holes.
  double weight_floor = 1e-4;
};

// Forward-warped view. hole_mask is the complement of depth validity.
// Holes carry depth 0 and black color.
struct WarpOutput {
  ColorImage image;
  DepthImage depth;
  Mask hole_mask;
};

// rel.rotation * p + rel.translation.
Point3 forward_warp_point(const Point3& p, const Pose& rel);

// Projected coordinates closer than this to an integer are snapped onto it,
// so warps that land on the pixel grid splat with exact unit weight.
inline constexpr double kSplatSnap = 1e-6;

// Destination of one source pixel after unproject, rigid transform and
// reproject. ok is false when the point ends up on or behind the target
// image plane.
struct SplatSource {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
  bool ok = false;
};
SplatSource warp_source_pixel(int x, int y, double depth,
                              const CameraIntrinsics& k, const Pose& rel);

// Z-buffered bilinear forward splatting of a source view into the view
// related by rel (source camera -> target camera). Parallel over rows with a
// deterministic per-pixel accumulation order; bit-identical to
// reference::forward_warp.
WarpOutput forward_warp(const ColorImage& src_image, const DepthImage& src_depth,
                        const CameraIntrinsics& k, const Pose& rel,
                        const WarpOptions& options = {});

double hole_fraction(const WarpOutput& w);

namespace reference {
WarpOutput forward_warp(const ColorImage& src_image, const DepthImage& src_depth,
                        const CameraIntrinsics& k, const Pose& rel,
                        const WarpOptions& options = {});
}  // namespace reference

}  // namespace pseudoview
