#include "pseudoview/warp.h"

#include <cstdint>
#include <limits>
#include <vector>

#include "pseudoview/parallel.h"
#include "warp_internal.h"

namespace pseudoview {

Point3 forward_warp_point(const Point3& p, const Pose& rel) { return rel.apply(p); }

SplatSource warp_source_pixel(int x, int y, double depth, const CameraIntrinsics& k,
                              const Pose& rel) {
  const Point3 p((x - k.cx) / k.fx * depth, (y - k.cy) / k.fy * depth, depth);
  const Point3 q = rel.apply(p);
  SplatSource s;
  if (!(q.z() > 0.0) || !std::isfinite(q.z())) return s;
  s.u = k.fx * q.x() / q.z() + k.cx;
  s.v = k.fy * q.y() / q.z() + k.cy;
  const double ru = std::nearbyint(s.u);
  const double rv = std::nearbyint(s.v);
  if (std::abs(s.u - ru) < kSplatSnap) s.u = ru;
  if (std::abs(s.v - rv) < kSplatSnap) s.v = rv;
  s.depth = q.z();
  s.ok = std::isfinite(s.u) && std::isfinite(s.v);
  return s;
}

double hole_fraction(const WarpOutput& w) {
  if (w.hole_mask.empty()) return 0.0;
  std::size_t holes = 0;
  for (auto h : w.hole_mask.data()) holes += h != 0;
  return static_cast<double>(holes) / static_cast<double>(w.hole_mask.size());
}

namespace {

struct SplatEntry {
  std::int32_t x;
  std::uint32_t src;
  double weight;
  double depth;
};

constexpr int kRowsPerBlock = 8;

}  // namespace

WarpOutput forward_warp(const ColorImage& src_image, const DepthImage& src_depth,
                        const CameraIntrinsics& k, const Pose& rel,
                        const WarpOptions& options) {
  detail::check_warp_inputs(src_image, src_depth, k, rel);
  const int w = k.width;
  const int h = k.height;
  const std::size_t n = src_image.size();
  const int blocks = (h + kRowsPerBlock - 1) / kRowsPerBlock;

  // Phase 1: destinations and per-(block, target row) splat counts.
  std::vector<SplatSource> dest(n);
  std::vector<std::uint32_t> counts(static_cast<std::size_t>(blocks) * h, 0);
#pragma omp parallel for schedule(dynamic, 1)
  for (int b = 0; b < blocks; ++b) {
    std::uint32_t* row_counts = &counts[static_cast<std::size_t>(b) * h];
    const int y_end = std::min(h, (b + 1) * kRowsPerBlock);
    for (int y = b * kRowsPerBlock; y < y_end; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t i = src_depth.values().index(x, y);
        if (!src_depth.valid(i)) continue;
        dest[i] = warp_source_pixel(x, y, src_depth.value(i), k, rel);
        detail::for_each_splat(dest[i], w, h,
                               [&](int, int ty, double) { ++row_counts[ty]; });
      }
    }
  }

  // Phase 2: offsets laid out by target row, then source block, so each
  // target row sees its splats in source raster order.
  std::vector<std::size_t> offsets(counts.size());
  std::vector<std::size_t> row_begin(static_cast<std::size_t>(h) + 1, 0);
  std::size_t running = 0;
  for (int ty = 0; ty < h; ++ty) {
    row_begin[ty] = running;
    for (int b = 0; b < blocks; ++b) {
      const std::size_t c = static_cast<std::size_t>(b) * h + ty;
      offsets[c] = running;
      running += counts[c];
    }
  }
  row_begin[h] = running;

  std::vector<SplatEntry> entries(running);
#pragma omp parallel for schedule(dynamic, 1)
  for (int b = 0; b < blocks; ++b) {
    std::size_t* cursor = &offsets[static_cast<std::size_t>(b) * h];
    const int y_end = std::min(h, (b + 1) * kRowsPerBlock);
    for (int y = b * kRowsPerBlock; y < y_end; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t i = src_depth.values().index(x, y);
        if (!src_depth.valid(i)) continue;
        const SplatSource& s = dest[i];
        detail::for_each_splat(s, w, h, [&](int tx, int ty, double wt) {
          entries[cursor[ty]++] = {tx, static_cast<std::uint32_t>(i), wt, s.depth};
        });
      }
    }
  }

  // Phase 3: per target row z-buffer and band blend.
  WarpOutput out{ColorImage(w, h, Rgb{0.0f, 0.0f, 0.0f}), DepthImage(w, h),
                 Mask(w, h, 1)};
#pragma omp parallel
  {
    std::vector<double> zmin(w);
    std::vector<double> wsum(w);
    std::vector<double> csum(3 * static_cast<std::size_t>(w));
#pragma omp for schedule(dynamic, 4)
    for (int ty = 0; ty < h; ++ty) {
      std::fill(zmin.begin(), zmin.end(), std::numeric_limits<double>::infinity());
      std::fill(wsum.begin(), wsum.end(), 0.0);
      std::fill(csum.begin(), csum.end(), 0.0);
      const std::size_t lo = row_begin[ty];
      const std::size_t hi = row_begin[ty + 1];
      for (std::size_t e = lo; e < hi; ++e) {
        const SplatEntry& s = entries[e];
        if (s.depth < zmin[s.x]) zmin[s.x] = s.depth;
      }
      for (std::size_t e = lo; e < hi; ++e) {
        const SplatEntry& s = entries[e];
        if (s.depth > zmin[s.x] * (1.0 + options.depth_band)) continue;
        const Rgb& c = src_image[s.src];
        wsum[s.x] += s.weight;
        csum[3 * s.x + 0] += s.weight * c[0];
        csum[3 * s.x + 1] += s.weight * c[1];
        csum[3 * s.x + 2] += s.weight * c[2];
      }
      for (int tx = 0; tx < w; ++tx) {
        if (!(wsum[tx] >= options.weight_floor)) continue;
        const std::size_t t = out.image.index(tx, ty);
        out.image[t] = {static_cast<float>(csum[3 * tx + 0] / wsum[tx]),
                        static_cast<float>(csum[3 * tx + 1] / wsum[tx]),
                        static_cast<float>(csum[3 * tx + 2] / wsum[tx])};
        out.depth.set(t, static_cast<float>(zmin[tx]));
        out.hole_mask[t] = 0;
      }
    }
  }
  return out;
}

}  // namespace pseudoview
