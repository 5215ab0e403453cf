#pragma once

#include "pseudoview/image.h"

namespace pseudoview {

// Standard SSIM: 11x11 Gaussian window, sigma 1.5, C1 = 0.01^2,
// C2 = 0.03^2 on [0, 1] channels, zero padding, averaged over channels.
struct SsimResult {
  Image<double> map;
  double mean = 0.0;
};

SsimResult ssim(const ColorImage& a, const ColorImage& b);

enum class L2Mode {
  kPerPixel,  // channel-mean squared difference at each pixel
  kScalar,    // one image-wide mean squared difference for all pixels
};

using ConfidenceMap = Image<double>;

// lambda1 * (1 - L2) + (1 - lambda1) * SSIM, clamped to [0, 1].
ConfidenceMap confidence_weights(const ColorImage& rendered, const ColorImage& inpainted,
                                 double lambda1, L2Mode mode = L2Mode::kPerPixel);

// Mean over pixels of W times the channel-mean absolute difference.
double confidence_loss(const ColorImage& rendered, const ColorImage& inpainted,
                       const ConfidenceMap& weights);

struct LossBreakdown {
  double l1 = 0.0;         // mean absolute color difference
  double ssim_term = 0.0;  // (1 - mean SSIM) / 2
  double depth_l1 = 0.0;   // mean absolute depth difference, mutually valid pixels
  bool depth_missing = false;  // no mutually valid depth pixels
  double l_ori = 0.0;
  double l_con = 0.0;
  double total = 0.0;
};

// lambda * l1 + (1 - lambda) * ssim_term + depth_l1.
double combine_base_loss(double l1, double ssim_mean, double depth_l1, double lambda);

// Fills l1, ssim_term, depth_l1, depth_missing and l_ori; l_con = 0 and
// total = l_ori.
LossBreakdown base_loss(const ColorImage& rendered_img, const ColorImage& gt_img,
                        const DepthImage& rendered_depth, const DepthImage& gt_depth,
                        double lambda);

double total_loss(const LossBreakdown& base, double l_con);
// Copy of base with l_con and total set.
LossBreakdown with_confidence(LossBreakdown base, double l_con);

double mean_abs_color_difference(const ColorImage& a, const ColorImage& b);

namespace reference {
SsimResult ssim(const ColorImage& a, const ColorImage& b);
}  // namespace reference

}  // namespace pseudoview
