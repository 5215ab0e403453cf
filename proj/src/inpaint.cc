#include "pseudoview/inpaint.h"

#include <algorithm>
#include <array>
#include <cmath>

#include "inpaint_internal.h"

namespace pseudoview {

namespace detail {

namespace {

constexpr int kCoarsestSize = 8;
constexpr int kMaxLevels = 12;

// Neighbour order is fixed (up, left, right, down) so sums round identically
// everywhere.
template <typename F>
inline void for_each_neighbor(const FillGrid& g, int x, int y, F&& f) {
  if (y > 0) f(static_cast<std::size_t>(y - 1) * g.width + x);
  if (x > 0) f(static_cast<std::size_t>(y) * g.width + (x - 1));
  if (x + 1 < g.width) f(static_cast<std::size_t>(y) * g.width + (x + 1));
  if (y + 1 < g.height) f(static_cast<std::size_t>(y + 1) * g.width + x);
}

// Mean of the valued neighbours into out; returns false when there are none.
inline bool neighbor_mean(const FillGrid& g, int x, int y, double* out) {
  int count = 0;
  for (int c = 0; c < g.channels; ++c) out[c] = 0.0;
  for_each_neighbor(g, x, y, [&](std::size_t j) {
    if (!g.has_value(j)) return;
    ++count;
    for (int c = 0; c < g.channels; ++c) out[c] += g.values[j * g.channels + c];
  });
  if (count == 0) return false;
  for (int c = 0; c < g.channels; ++c) out[c] /= count;
  return true;
}

// Breadth-first seeding: each layer of pending pixels touching valued
// pixels takes the mean of those neighbours.
void seed_by_layers(FillGrid& g) {
  const int nc = g.channels;
  std::vector<std::size_t> frontier;
  std::vector<std::uint8_t> queued(g.state.size(), 0);
  for (std::size_t i = 0; i < g.state.size(); ++i) {
    if (g.state[i] != kPending) continue;
    const int x = static_cast<int>(i % g.width);
    const int y = static_cast<int>(i / g.width);
    bool touches = false;
    for_each_neighbor(g, x, y, [&](std::size_t j) { touches = touches || g.has_value(j); });
    if (touches) {
      frontier.push_back(i);
      queued[i] = 1;
    }
  }
  std::vector<double> fresh;
  while (!frontier.empty()) {
    fresh.assign(frontier.size() * nc, 0.0);
    for (std::size_t f = 0; f < frontier.size(); ++f) {
      const std::size_t i = frontier[f];
      neighbor_mean(g, static_cast<int>(i % g.width), static_cast<int>(i / g.width),
                    &fresh[f * nc]);
    }
    std::vector<std::size_t> next;
    for (std::size_t f = 0; f < frontier.size(); ++f) {
      const std::size_t i = frontier[f];
      std::copy_n(&fresh[f * nc], nc, &g.values[i * nc]);
      g.state[i] = kAssigned;
    }
    for (std::size_t i : frontier) {
      const int x = static_cast<int>(i % g.width);
      const int y = static_cast<int>(i / g.width);
      for_each_neighbor(g, x, y, [&](std::size_t j) {
        if (g.state[j] == kPending && !queued[j]) {
          queued[j] = 1;
          next.push_back(j);
        }
      });
    }
    std::sort(next.begin(), next.end());
    frontier.swap(next);
  }
}

FillGrid downsample(const FillGrid& fine) {
  FillGrid c;
  c.width = (fine.width + 1) / 2;
  c.height = (fine.height + 1) / 2;
  c.channels = fine.channels;
  const int nc = c.channels;
  c.values.assign(static_cast<std::size_t>(c.width) * c.height * nc, 0.0);
  c.state.assign(static_cast<std::size_t>(c.width) * c.height, kAbsent);
  for (int y = 0; y < c.height; ++y) {
    for (int x = 0; x < c.width; ++x) {
      const std::size_t ci = static_cast<std::size_t>(y) * c.width + x;
      int fixed = 0;
      int present = 0;
      bool pending = false;
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          const int fx = 2 * x + dx;
          const int fy = 2 * y + dy;
          if (fx >= fine.width || fy >= fine.height) continue;
          const std::size_t fi = static_cast<std::size_t>(fy) * fine.width + fx;
          if (fine.state[fi] != kAbsent) ++present;
          if (fine.state[fi] == kFixed) {
            ++fixed;
            for (int k = 0; k < nc; ++k) c.values[ci * nc + k] += fine.values[fi * nc + k];
          } else if (fine.state[fi] == kPending) {
            pending = true;
          }
        }
      }
      // Only fully fixed blocks stay fixed: their mean is the value at the
      // coarse pixel center for affine data. Mixed blocks are solved.
      if (fixed > 0 && fixed == present) {
        c.state[ci] = kFixed;
        for (int k = 0; k < nc; ++k) c.values[ci * nc + k] /= fixed;
      } else if (pending) {
        c.state[ci] = kPending;
        for (int k = 0; k < nc; ++k) c.values[ci * nc + k] = 0.0;
      }
    }
  }
  return c;
}

// Bilinear initial values for pending fine pixels from the solved coarse grid;
// coarse pixels without a value are skipped and the weights renormalized.
void upsample_into(const FillGrid& coarse, FillGrid& fine) {
  const int nc = fine.channels;
  std::vector<double> acc(nc);
  for (int y = 0; y < fine.height; ++y) {
    for (int x = 0; x < fine.width; ++x) {
      const std::size_t fi = static_cast<std::size_t>(y) * fine.width + x;
      if (fine.state[fi] != kPending) continue;
      const double cxf = (x - 0.5) / 2.0;
      const double cyf = (y - 0.5) / 2.0;
      const int x0 = static_cast<int>(std::floor(cxf));
      const int y0 = static_cast<int>(std::floor(cyf));
      const double ax = cxf - x0;
      const double ay = cyf - y0;
      double wsum = 0.0;
      std::fill(acc.begin(), acc.end(), 0.0);
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          const int cx = x0 + dx;
          const int cy = y0 + dy;
          if (cx < 0 || cy < 0 || cx >= coarse.width || cy >= coarse.height) continue;
          const std::size_t ci = static_cast<std::size_t>(cy) * coarse.width + cx;
          if (!coarse.has_value(ci)) continue;
          const double w = (dx ? ax : 1.0 - ax) * (dy ? ay : 1.0 - ay);
          if (w <= 0.0) continue;
          wsum += w;
          for (int k = 0; k < nc; ++k) acc[k] += w * coarse.values[ci * nc + k];
        }
      }
      if (wsum <= 0.0) continue;
      for (int k = 0; k < nc; ++k) fine.values[fi * nc + k] = acc[k] / wsum;
      fine.state[fi] = kAssigned;
    }
  }
}

// Marks pending pixels with no path to a fixed pixel as absent; returns them.
std::vector<std::uint8_t> isolate_unreachable(FillGrid& g) {
  std::vector<std::uint8_t> reached(g.state.size(), 0);
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < g.state.size(); ++i) {
    if (g.state[i] == kFixed) {
      reached[i] = 1;
      stack.push_back(i);
    }
  }
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    for_each_neighbor(g, static_cast<int>(i % g.width), static_cast<int>(i / g.width),
                      [&](std::size_t j) {
                        if (!reached[j] && g.state[j] == kPending) {
                          reached[j] = 1;
                          stack.push_back(j);
                        }
                      });
  }
  std::vector<std::uint8_t> unreachable(g.state.size(), 0);
  for (std::size_t i = 0; i < g.state.size(); ++i) {
    if (g.state[i] == kPending && !reached[i]) {
      unreachable[i] = 1;
      g.state[i] = kAbsent;
    }
  }
  return unreachable;
}

template <bool kParallel>
int relax_impl(FillGrid& g, double tolerance, int max_sweeps) {
  std::array<std::vector<std::size_t>, 2> lists;
  for (std::size_t i = 0; i < g.state.size(); ++i) {
    if (g.state[i] != kAssigned) continue;
    const int x = static_cast<int>(i % g.width);
    const int y = static_cast<int>(i / g.width);
    lists[(x + y) & 1].push_back(i);
  }
  if (lists[0].empty() && lists[1].empty()) return 0;
  const int nc = g.channels;
  int sweep = 0;
  while (sweep < max_sweeps) {
    ++sweep;
    double max_change = 0.0;
    for (const auto& list : lists) {
      const long long m = static_cast<long long>(list.size());
#pragma omp parallel for schedule(static) reduction(max : max_change) if (kParallel)
      for (long long t = 0; t < m; ++t) {
        const std::size_t i = list[static_cast<std::size_t>(t)];
        double mean[4];
        if (!neighbor_mean(g, static_cast<int>(i % g.width), static_cast<int>(i / g.width), mean)) {
          continue;
        }
        for (int c = 0; c < nc; ++c) {
          double& v = g.values[i * nc + c];
          max_change = std::max(max_change, std::abs(mean[c] - v));
          v = mean[c];
        }
      }
    }
    if (max_change < tolerance) break;
  }
  return sweep;
}

}  // namespace

int relax_parallel(FillGrid& grid, double tolerance, int max_sweeps) {
  return relax_impl<true>(grid, tolerance, max_sweeps);
}

int relax_serial(FillGrid& grid, double tolerance, int max_sweeps) {
  return relax_impl<false>(grid, tolerance, max_sweeps);
}

void harmonic_solve(FillGrid& grid, const HarmonicOptions& options, RelaxFn relax) {
  std::vector<FillGrid> levels;
  levels.push_back(std::move(grid));
  while (static_cast<int>(levels.size()) < kMaxLevels &&
         std::min(levels.back().width, levels.back().height) > kCoarsestSize) {
    levels.push_back(downsample(levels.back()));
  }
  for (int l = static_cast<int>(levels.size()) - 1; l >= 0; --l) {
    FillGrid& g = levels[static_cast<std::size_t>(l)];
    if (l + 1 < static_cast<int>(levels.size())) {
      upsample_into(levels[static_cast<std::size_t>(l) + 1], g);
    }
    seed_by_layers(g);
    relax(g, options.tolerance, options.max_sweeps);
  }
  grid = std::move(levels.front());
}

InpaintResult harmonic_fill_with(const ColorImage& image, const DepthImage& depth,
                                 const Mask& holes, const HarmonicOptions& options,
                                 RelaxFn relax) {
  require_same_shape(image, depth, "inpaint: image vs depth");
  require_same_shape(image, holes, "inpaint: image vs hole mask");
  const int w = image.width();
  const int h = image.height();
  const std::size_t n = image.size();

  InpaintResult out{image, depth, Mask(w, h, 0)};

  FillGrid color{w, h, 3, std::vector<double>(n * 3, 0.0), std::vector<std::uint8_t>(n, kAbsent)};
  FillGrid dgrid{w, h, 1, std::vector<double>(n, 0.0), std::vector<std::uint8_t>(n, kAbsent)};
  bool any_hole = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (holes[i]) {
      any_hole = true;
      color.state[i] = kPending;
      dgrid.state[i] = kPending;
      continue;
    }
    color.state[i] = kFixed;
    for (int c = 0; c < 3; ++c) color.values[i * 3 + c] = image[i][c];
    if (depth.valid(i)) {
      dgrid.state[i] = kFixed;
      dgrid.values[i] = depth.value(i);
    }
  }
  if (!any_hole) return out;

  const auto color_lost = isolate_unreachable(color);
  const auto depth_lost = isolate_unreachable(dgrid);
  harmonic_solve(color, options, relax);
  harmonic_solve(dgrid, options, relax);

  for (std::size_t i = 0; i < n; ++i) {
    if (!holes[i]) continue;
    if (color_lost[i] || depth_lost[i] || color.state[i] != kAssigned ||
        dgrid.state[i] != kAssigned || !(dgrid.values[i] > 0.0)) {
      out.residual[i] = 1;
      out.image[i] = {0.0f, 0.0f, 0.0f};
      out.depth.invalidate(i);
      continue;
    }
    out.image[i] = {static_cast<float>(color.values[i * 3 + 0]),
                    static_cast<float>(color.values[i * 3 + 1]),
                    static_cast<float>(color.values[i * 3 + 2])};
    out.depth.set(i, static_cast<float>(dgrid.values[i]));
  }
  return out;
}

}  // namespace detail

InpaintResult harmonic_fill(const ColorImage& image, const DepthImage& depth, const Mask& holes,
                            const HarmonicOptions& options) {
  return detail::harmonic_fill_with(image, depth, holes, options, &detail::relax_parallel);
}

InpaintResult NullInpainter::inpaint(const ColorImage& image, const DepthImage& depth,
                                     const Mask& holes) const {
  require_same_shape(image, holes, "inpaint: image vs hole mask");
  return {image, depth, holes};
}

namespace reference {

InpaintResult harmonic_fill(const ColorImage& image, const DepthImage& depth, const Mask& holes,
                            const HarmonicOptions& options) {
  return detail::harmonic_fill_with(image, depth, holes, options, &detail::relax_serial);
}

}  // namespace reference

}  // namespace pseudoview
