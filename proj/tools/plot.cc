#include "plot.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pseudoview::plot {

namespace {

constexpr int kMargin = 24;

struct Canvas {
  ColorImage img;
  double x0, x1, y0, y1;

  Canvas(int w, int h, double xa, double xb, double ya, double yb)
      : img(w, h, Rgb{1, 1, 1}), x0(xa), x1(xb), y0(ya), y1(yb) {
    if (!(x1 > x0)) x1 = x0 + 1.0;
    if (!(y1 > y0)) y1 = y0 + 1.0;
    const Rgb axis{0.4f, 0.4f, 0.4f};
    for (int x = kMargin; x < w - kMargin / 2; ++x) img.at(x, h - kMargin) = axis;
    for (int y = kMargin / 2; y <= h - kMargin; ++y) img.at(kMargin, y) = axis;
  }

  double px(double x) const {
    return kMargin + (x - x0) / (x1 - x0) * (img.width() - 1.5 * kMargin);
  }
  double py(double y) const {
    return img.height() - kMargin - (y - y0) / (y1 - y0) * (img.height() - 1.5 * kMargin);
  }

  void dot(double x, double y, const Rgb& c) {
    const int u = static_cast<int>(std::lround(px(x)));
    const int v = static_cast<int>(std::lround(py(y)));
    if (img.contains(u, v)) img.at(u, v) = c;
  }

  void line(double xa, double ya, double xb, double yb, const Rgb& c) {
    const double ua = px(xa), va = py(ya), ub = px(xb), vb = py(yb);
    const int steps = std::max(1, static_cast<int>(std::ceil(std::max(std::abs(ub - ua), std::abs(vb - va)))));
    for (int s = 0; s <= steps; ++s) {
      const double t = static_cast<double>(s) / steps;
      const int u = static_cast<int>(std::lround(ua + t * (ub - ua)));
      const int v = static_cast<int>(std::lround(va + t * (vb - va)));
      if (img.contains(u, v)) img.at(u, v) = c;
    }
  }
};

}  // namespace

ColorImage calibration_fit(const std::vector<Pair>& pairs, const CalibParams& params, int width,
                           int height) {
  double dmin = std::numeric_limits<double>::infinity(), dmax = -dmin;
  double zmin = dmin, zmax = -dmin;
  for (const Pair& p : pairs) {
    dmin = std::min(dmin, p.disparity);
    dmax = std::max(dmax, p.disparity);
    zmin = std::min(zmin, p.lidar_depth);
    zmax = std::max(zmax, p.lidar_depth);
  }
  if (pairs.empty()) dmin = zmin = 0.0, dmax = zmax = 1.0;
  Canvas c(width, height, dmin, dmax, std::min(0.0, zmin), zmax);
  const std::size_t stride = std::max<std::size_t>(1, pairs.size() / 20000);
  for (std::size_t i = 0; i < pairs.size(); i += stride) {
    c.dot(pairs[i].disparity, pairs[i].lidar_depth, {0.35f, 0.55f, 0.85f});
  }
  const int n = 400;
  double prev_d = dmin, prev_z = params.depth(dmin);
  for (int i = 1; i <= n; ++i) {
    const double d = dmin + (dmax - dmin) * i / n;
    const double z = params.depth(d);
    if (std::isfinite(z) && std::isfinite(prev_z) && std::abs(d + params.c2) > kPoleGuard) {
      c.line(prev_d, std::clamp(prev_z, c.y0, c.y1), d, std::clamp(z, c.y0, c.y1), {0.85f, 0.2f, 0.1f});
    }
    prev_d = d;
    prev_z = z;
  }
  return c.img;
}

ColorImage loss_trace(const std::vector<LossTraceRow>& trace, int width, int height) {
  double ymax = 0.0;
  for (const LossTraceRow& r : trace) ymax = std::max({ymax, r.l_ori, r.l_con, r.total});
  const double xmax = trace.empty() ? 1.0 : trace.back().iteration;
  Canvas c(width, height, trace.empty() ? 0.0 : trace.front().iteration, xmax, 0.0, ymax);
  for (std::size_t i = 1; i < trace.size(); ++i) {
    const LossTraceRow& a = trace[i - 1];
    const LossTraceRow& b = trace[i];
    c.line(a.iteration, a.total, b.iteration, b.total, {0.1f, 0.1f, 0.1f});
    c.line(a.iteration, a.l_ori, b.iteration, b.l_ori, {0.15f, 0.35f, 0.8f});
    if (a.pseudo_active && b.pseudo_active) {
      c.line(a.iteration, a.l_con, b.iteration, b.l_con, {0.95f, 0.55f, 0.1f});
    }
  }
  return c.img;
}

}  // namespace pseudoview::plot
