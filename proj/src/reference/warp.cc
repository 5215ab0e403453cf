#include <limits>
#include <vector>

#include "../warp_internal.h"

namespace pseudoview::reference {

// Plain scatter over source pixels in raster order with full-frame z-buffer
// and accumulators.
WarpOutput forward_warp(const ColorImage& src_image, const DepthImage& src_depth,
                        const CameraIntrinsics& k, const Pose& rel,
                        const WarpOptions& options) {
  detail::check_warp_inputs(src_image, src_depth, k, rel);
  const int w = k.width;
  const int h = k.height;
  const std::size_t n = static_cast<std::size_t>(w) * h;

  std::vector<SplatSource> dest(n);
  std::vector<double> zmin(n, std::numeric_limits<double>::infinity());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = src_depth.values().index(x, y);
      if (!src_depth.valid(i)) continue;
      dest[i] = warp_source_pixel(x, y, src_depth.value(i), k, rel);
      const double z = dest[i].depth;
      detail::for_each_splat(dest[i], w, h, [&](int tx, int ty, double) {
        double& m = zmin[static_cast<std::size_t>(ty) * w + tx];
        if (z < m) m = z;
      });
    }
  }

  std::vector<double> wsum(n, 0.0);
  std::vector<double> csum(3 * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!src_depth.valid(i)) continue;
    const double z = dest[i].depth;
    const Rgb& c = src_image[i];
    detail::for_each_splat(dest[i], w, h, [&](int tx, int ty, double wt) {
      const std::size_t t = static_cast<std::size_t>(ty) * w + tx;
      if (z > zmin[t] * (1.0 + options.depth_band)) return;
      wsum[t] += wt;
      csum[3 * t + 0] += wt * c[0];
      csum[3 * t + 1] += wt * c[1];
      csum[3 * t + 2] += wt * c[2];
    });
  }

  WarpOutput out{ColorImage(w, h, Rgb{0.0f, 0.0f, 0.0f}), DepthImage(w, h),
                 Mask(w, h, 1)};
  for (std::size_t t = 0; t < n; ++t) {
    if (!(wsum[t] >= options.weight_floor)) continue;
    out.image[t] = {static_cast<float>(csum[3 * t + 0] / wsum[t]),
                    static_cast<float>(csum[3 * t + 1] / wsum[t]),
                    static_cast<float>(csum[3 * t + 2] / wsum[t])};
    out.depth.set(t, static_cast<float>(zmin[t]));
    out.hole_mask[t] = 0;
  }
  return out;
}

}  // namespace pseudoview::reference
