#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Geometry>

namespace pseudoview::oracle {

Vec2 project(const Vec3& p, const CameraIntrinsics& k) {
  const double xh = k.fx * p.x() + k.cx * p.z();
  const double yh = k.fy * p.y() + k.cy * p.z();
  return {xh / p.z(), yh / p.z()};
}

Vec2 displacement(const Vec3& p, const Vec3& dt, const CameraIntrinsics& k) {
  return oracle::project(Vec3(p + dt), k) - oracle::project(p, k);
}

double ssim_mean(const ColorImage& a, const ColorImage& b) {
  constexpr int r = 5;
  constexpr double sigma = 1.5;
  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;
  double win[2 * r + 1][2 * r + 1];
  double total = 0.0;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      win[dy + r][dx + r] = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      total += win[dy + r][dx + r];
    }
  }
  for (auto& row : win) {
    for (double& w : row) w /= total;
  }
  const int w = a.width();
  const int h = a.height();
  double acc = 0.0;
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        // Zero padding: taps outside the image contribute value 0.
        const auto va = [&](int xx, int yy) { return a.contains(xx, yy) ? double(a.at(xx, yy)[c]) : 0.0; };
        const auto vb = [&](int xx, int yy) { return b.contains(xx, yy) ? double(b.at(xx, yy)[c]) : 0.0; };
        double ma = 0.0, mb = 0.0;
        for (int dy = -r; dy <= r; ++dy) {
          for (int dx = -r; dx <= r; ++dx) {
            ma += win[dy + r][dx + r] * va(x + dx, y + dy);
            mb += win[dy + r][dx + r] * vb(x + dx, y + dy);
          }
        }
        double saa = 0.0, sbb = 0.0, sab = 0.0;
        for (int dy = -r; dy <= r; ++dy) {
          for (int dx = -r; dx <= r; ++dx) {
            const double ea = va(x + dx, y + dy) - ma;
            const double eb = vb(x + dx, y + dy) - mb;
            const double wt = win[dy + r][dx + r];
            saa += wt * ea * ea;
            sbb += wt * eb * eb;
            sab += wt * ea * eb;
          }
        }
        acc += ((2 * ma * mb + c1) * (2 * sab + c2)) /
               ((ma * ma + mb * mb + c1) * (saa + sbb + c2));
      }
    }
  }
  return acc / (3.0 * w * h);
}

double mean_abs_difference(const ColorImage& a, const ColorImage& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (int c = 0; c < 3; ++c) s += std::abs(double(a[i][c]) - double(b[i][c]));
  }
  return s / (3.0 * a.size());
}

WarpOutput brute_force_warp(const ColorImage& src_image, const DepthImage& src_depth,
                            const CameraIntrinsics& k, const Pose& rel,
                            const WarpOptions& options) {
  const int w = k.width;
  const int h = k.height;
  std::vector<SplatSource> dest(src_depth.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = src_depth.values().index(x, y);
      if (src_depth.valid(i)) dest[i] = warp_source_pixel(x, y, src_depth.value(i), k, rel);
    }
  }
  WarpOutput out{ColorImage(w, h, Rgb{0, 0, 0}), DepthImage(w, h), Mask(w, h, 1)};
  for (int ty = 0; ty < h; ++ty) {
    for (int tx = 0; tx < w; ++tx) {
      struct Hit {
        double z, wt;
        Rgb c;
      };
      std::vector<Hit> hits;
      for (std::size_t i = 0; i < dest.size(); ++i) {
        const SplatSource& s = dest[i];
        if (!src_depth.valid(i) || !s.ok) continue;
        const double du = std::abs(s.u - tx);
        const double dv = std::abs(s.v - ty);
        if (!(du < 1.0 && dv < 1.0)) continue;
        const double wt = (1.0 - du) * (1.0 - dv);
        if (wt > 0.0) hits.push_back({s.depth, wt, src_image[i]});
      }
      if (hits.empty()) continue;
      double zmin = std::numeric_limits<double>::infinity();
      for (const Hit& hh : hits) zmin = std::min(zmin, hh.z);
      double ws = 0.0, cs[3] = {0, 0, 0};
      for (const Hit& hh : hits) {
        if (hh.z > zmin * (1.0 + options.depth_band)) continue;
        ws += hh.wt;
        for (int c = 0; c < 3; ++c) cs[c] += hh.wt * hh.c[c];
      }
      if (!(ws >= options.weight_floor)) continue;
      const std::size_t t = out.image.index(tx, ty);
      out.image[t] = {float(cs[0] / ws), float(cs[1] / ws), float(cs[2] / ws)};
      out.depth.set(t, static_cast<float>(zmin));
      out.hole_mask[t] = 0;
    }
  }
  return out;
}

RayOracleHit nearest_plane(const Scene& scene, const Pose& pose, const CameraIntrinsics& k,
                           double u, double v) {
  // Work in the camera frame: transform every plane instead of the ray.
  const Vec3 ray((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
  RayOracleHit best;
  for (std::size_t i = 0; i < scene.planes.size(); ++i) {
    const Plane& p = scene.planes[i];
    const Vec3 n = pose.rotation * p.normal;
    const Vec3 q = pose.apply(p.point);
    const double denom = n.dot(ray);
    if (denom == 0.0) continue;
    const double z = n.dot(q) / denom;
    if (!(z > 1e-9)) continue;
    if (p.half_extent) {
      const Vec3 local = pose.rotation.transpose() * (z * ray - q);
      if (std::abs(local.dot(p.axis_s())) > p.half_extent->x() ||
          std::abs(local.dot(p.axis_t())) > p.half_extent->y()) {
        continue;
      }
    }
    if (!best.hit || z < best.depth) best = {true, z, static_cast<int>(i)};
  }
  return best;
}

DepthImage random_depth(int width, int height, double z_min, double invalid_fraction,
                        SplitRng& rng) {
  const double amp = rng.uniform(0.5, 4.0) * z_min;
  const double fx = rng.uniform(0.5, 6.0) * 2.0 * std::numbers::pi / width;
  const double fy = rng.uniform(0.5, 6.0) * 2.0 * std::numbers::pi / height;
  const double px = rng.uniform(0.0, 6.3);
  const double py = rng.uniform(0.0, 6.3);
  const double tilt = rng.uniform(0.0, 1.0) * z_min / width;
  DepthImage d(width, height);
  for (int y = 0; y < height; ++y) {
    const double sy = std::sin(fy * y + py);
    for (int x = 0; x < width; ++x) {
      if (rng.uniform() < invalid_fraction) continue;
      const double bump = 0.5 * amp * (1.0 + std::sin(fx * x + px) * sy);
      d.set(x, y, static_cast<float>(z_min + bump + tilt * x));
    }
  }
  // Make the minimum exact and valid.
  const int ax = static_cast<int>(rng.uniform(0.0, width));
  const int ay = static_cast<int>(rng.uniform(0.0, height));
  d.set(std::min(ax, width - 1), std::min(ay, height - 1), static_cast<float>(z_min));
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.valid(i) && d.value(i) < static_cast<float>(z_min)) d.set(i, static_cast<float>(z_min));
  }
  return d;
}

ColorImage random_image(int width, int height, SplitRng& rng) {
  ColorImage img(width, height);
  for (std::size_t i = 0; i < img.size(); ++i) {
    for (int c = 0; c < 3; ++c) img[i][c] = static_cast<float>(rng.uniform());
  }
  return img;
}

std::vector<Pair> calibration_pairs(const CalibParams& truth, std::size_t n, double d_max,
                                    SplitRng& rng) {
  const double d_lo = std::max(1.0, 1.0 - truth.c2);
  std::vector<Pair> pairs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = rng.uniform(d_lo, d_max);
    pairs[i] = {truth.c1 / (d + truth.c2) + truth.c3, d, static_cast<int>(i / 1000),
                static_cast<int>(i % 1000)};
  }
  return pairs;
}

CalibDraw wide_calib_draw(SplitRng& rng, double d_cap) {
  for (;;) {
    CalibDraw out;
    out.truth = {std::exp(rng.uniform(std::log(10.0), std::log(1e4))), rng.uniform(-1.0, 5.0),
                 rng.uniform(-5.0, 5.0)};
    const double d_lo = std::max(1.0, 1.0 - out.truth.c2);
    out.d_max = d_cap;
    if (out.truth.c3 < 0.1) {
      out.d_max = std::min(d_cap, out.truth.c1 / (0.1 - out.truth.c3) - out.truth.c2);
    }
    if (out.d_max >= d_lo + 5.0) return out;
  }
}

double relative_param_error(const CalibParams& est, const CalibParams& truth) {
  const double dx = est.c1 - truth.c1;
  const double dy = est.c2 - truth.c2;
  const double dz = est.c3 - truth.c3;
  const double n = std::sqrt(truth.c1 * truth.c1 + truth.c2 * truth.c2 + truth.c3 * truth.c3);
  return std::sqrt(dx * dx + dy * dy + dz * dz) / n;
}

}  // namespace pseudoview::oracle
