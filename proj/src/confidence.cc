#include "pseudoview/confidence.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "pseudoview/parallel.h"

namespace pseudoview {

namespace {

constexpr int kRadius = 5;  // 11x11 window
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

std::array<double, 2 * kRadius + 1> gaussian_kernel() {
  std::array<double, 2 * kRadius + 1> g{};
  double sum = 0.0;
  for (int k = -kRadius; k <= kRadius; ++k) {
    g[k + kRadius] = std::exp(-(k * k) / (2.0 * kSigma * kSigma));
    sum += g[k + kRadius];
  }
  for (double& v : g) v /= sum;
  return g;
}

double ssim_value(double mu_a, double mu_b, double e_aa, double e_bb, double e_ab) {
  const double var_a = e_aa - mu_a * mu_a;
  const double var_b = e_bb - mu_b * mu_b;
  const double cov = e_ab - mu_a * mu_b;
  return ((2.0 * mu_a * mu_b + kC1) * (2.0 * cov + kC2)) /
         ((mu_a * mu_a + mu_b * mu_b + kC1) * (var_a + var_b + kC2));
}

double row_mean_sum(const Image<double>& m) {
  return deterministic_sum(
      static_cast<std::size_t>(m.height()),
      [&](std::size_t y) {
        double s = 0.0;
        for (int x = 0; x < m.width(); ++x) s += m.at(x, static_cast<int>(y));
        return s;
      },
      1);
}

}  // namespace

SsimResult ssim(const ColorImage& a, const ColorImage& b) {
  require_same_shape(a, b, "ssim");
  const int w = a.width();
  const int h = a.height();
  const auto g = gaussian_kernel();
  const std::size_t n = a.size();

  SsimResult out{Image<double>(w, h, 0.0), 0.0};
  // Five moments per channel: a, b, a*a, b*b, a*b.
  std::vector<double> horiz(5 * n);
  std::vector<double> moments(5 * n);
  for (int c = 0; c < 3; ++c) {
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double s[5] = {0, 0, 0, 0, 0};
        for (int k = -kRadius; k <= kRadius; ++k) {
          const int xx = x + k;
          if (xx < 0 || xx >= w) continue;
          const double va = a.at(xx, y)[c];
          const double vb = b.at(xx, y)[c];
          const double gk = g[k + kRadius];
          s[0] += gk * va;
          s[1] += gk * vb;
          s[2] += gk * (va * va);
          s[3] += gk * (vb * vb);
          s[4] += gk * (va * vb);
        }
        const std::size_t i = a.index(x, y);
        for (int m = 0; m < 5; ++m) horiz[m * n + i] = s[m];
      }
    }
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double s[5] = {0, 0, 0, 0, 0};
        for (int k = -kRadius; k <= kRadius; ++k) {
          const int yy = y + k;
          if (yy < 0 || yy >= h) continue;
          const std::size_t j = a.index(x, yy);
          const double gk = g[k + kRadius];
          for (int m = 0; m < 5; ++m) s[m] += gk * horiz[m * n + j];
        }
        const std::size_t i = a.index(x, y);
        out.map[i] += ssim_value(s[0], s[1], s[2], s[3], s[4]);
      }
    }
  }
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    out.map[static_cast<std::size_t>(i)] /= 3.0;
  }
  out.mean = row_mean_sum(out.map) / static_cast<double>(n);
  return out;
}

ConfidenceMap confidence_weights(const ColorImage& rendered, const ColorImage& inpainted,
                                 double lambda1, L2Mode mode) {
  require_same_shape(rendered, inpainted, "confidence_weights");
  if (!(lambda1 >= 0.0 && lambda1 <= 1.0)) {
    throw ValidationError("confidence_weights: lambda1 must lie in [0, 1], got " +
                          std::to_string(lambda1));
  }
  const SsimResult s = ssim(rendered, inpainted);
  const std::size_t n = rendered.size();
  ConfidenceMap l2(rendered.width(), rendered.height(), 0.0);
#pragma omp parallel for schedule(static)
  for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double acc = 0.0;
    for (int c = 0; c < 3; ++c) {
      const double d = static_cast<double>(rendered[i][c]) - inpainted[i][c];
      acc += d * d;
    }
    l2[i] = acc / 3.0;
  }
  if (mode == L2Mode::kScalar) {
    const double mean = row_mean_sum(l2) / static_cast<double>(n);
    std::fill(l2.data().begin(), l2.data().end(), mean);
  }
  ConfidenceMap wmap(rendered.width(), rendered.height(), 0.0);
#pragma omp parallel for schedule(static)
  for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const double v = lambda1 * (1.0 - l2[i]) + (1.0 - lambda1) * s.map[i];
    wmap[i] = std::clamp(v, 0.0, 1.0);
  }
  return wmap;
}

double mean_abs_color_difference(const ColorImage& a, const ColorImage& b) {
  require_same_shape(a, b, "mean_abs_color_difference");
  const double sum = deterministic_sum(a.size(), [&](std::size_t i) {
    double acc = 0.0;
    for (int c = 0; c < 3; ++c) acc += std::abs(static_cast<double>(a[i][c]) - b[i][c]);
    return acc / 3.0;
  });
  return sum / static_cast<double>(a.size());
}

double confidence_loss(const ColorImage& rendered, const ColorImage& inpainted,
                       const ConfidenceMap& weights) {
  require_same_shape(rendered, inpainted, "confidence_loss");
  require_same_shape(rendered, weights, "confidence_loss: weights");
  const double sum = deterministic_sum(rendered.size(), [&](std::size_t i) {
    double acc = 0.0;
    for (int c = 0; c < 3; ++c) {
      acc += std::abs(static_cast<double>(rendered[i][c]) - inpainted[i][c]);
    }
    return weights[i] * (acc / 3.0);
  });
  return sum / static_cast<double>(rendered.size());
}

double combine_base_loss(double l1, double ssim_mean, double depth_l1, double lambda) {
  return lambda * l1 + (1.0 - lambda) * ((1.0 - ssim_mean) / 2.0) + depth_l1;
}

LossBreakdown base_loss(const ColorImage& rendered_img, const ColorImage& gt_img,
                        const DepthImage& rendered_depth, const DepthImage& gt_depth,
                        double lambda) {
  require_same_shape(rendered_img, gt_img, "base_loss: images");
  require_same_shape(rendered_depth, gt_depth, "base_loss: depths");
  require_same_shape(rendered_img, rendered_depth, "base_loss: image vs depth");
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ValidationError("base_loss: lambda must lie in [0, 1], got " + std::to_string(lambda));
  }
  LossBreakdown out;
  out.l1 = mean_abs_color_difference(rendered_img, gt_img);
  const double ssim_mean = ssim(rendered_img, gt_img).mean;
  out.ssim_term = (1.0 - ssim_mean) / 2.0;

  std::size_t count = 0;
  for (std::size_t i = 0; i < gt_depth.size(); ++i) {
    count += rendered_depth.valid(i) && gt_depth.valid(i);
  }
  if (count == 0) {
    out.depth_missing = true;
  } else {
    const double sum = deterministic_sum(gt_depth.size(), [&](std::size_t i) {
      if (!rendered_depth.valid(i) || !gt_depth.valid(i)) return 0.0;
      return std::abs(static_cast<double>(rendered_depth.value(i)) - gt_depth.value(i));
    });
    out.depth_l1 = sum / static_cast<double>(count);
  }
  out.l_ori = combine_base_loss(out.l1, ssim_mean, out.depth_l1, lambda);
  out.total = out.l_ori;
  return out;
}

double total_loss(const LossBreakdown& base, double l_con) { return base.l_ori + l_con; }

LossBreakdown with_confidence(LossBreakdown base, double l_con) {
  base.l_con = l_con;
  base.total = total_loss(base, l_con);
  return base;
}

namespace reference {

// Direct 11x11 windowed sums, one pixel at a time.
SsimResult ssim(const ColorImage& a, const ColorImage& b) {
  require_same_shape(a, b, "ssim");
  const auto g = gaussian_kernel();
  const int w = a.width();
  const int h = a.height();
  SsimResult out{Image<double>(w, h, 0.0), 0.0};
  double total = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double value = 0.0;
      for (int c = 0; c < 3; ++c) {
        double s[5] = {0, 0, 0, 0, 0};
        for (int dy = -kRadius; dy <= kRadius; ++dy) {
          for (int dx = -kRadius; dx <= kRadius; ++dx) {
            const int xx = x + dx;
            const int yy = y + dy;
            if (!a.contains(xx, yy)) continue;
            const double wgt = g[dx + kRadius] * g[dy + kRadius];
            const double va = a.at(xx, yy)[c];
            const double vb = b.at(xx, yy)[c];
            s[0] += wgt * va;
            s[1] += wgt * vb;
            s[2] += wgt * va * va;
            s[3] += wgt * vb * vb;
            s[4] += wgt * va * vb;
          }
        }
        value += ssim_value(s[0], s[1], s[2], s[3], s[4]);
      }
      out.map.at(x, y) = value / 3.0;
      total += out.map.at(x, y);
    }
  }
  out.mean = total / static_cast<double>(a.size());
  return out;
}

}  // namespace reference

}  // namespace pseudoview
