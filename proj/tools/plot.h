#pragma once

#include <vector>

#include "pseudoview/calib.h"
#include "pseudoview/cascade.h"
#include "pseudoview/image.h"

namespace pseudoview::plot {

// Scatter of (disparity, LiDAR depth) pairs with the fitted curve on top.
ColorImage calibration_fit(const std::vector<Pair>& pairs, const CalibParams& params,
                           int width = 480, int height = 360);

// l_ori (blue), l_con (orange) and total (black) per iteration.
ColorImage loss_trace(const std::vector<LossTraceRow>& trace, int width = 640,
                      int height = 320);

}  // namespace pseudoview::plot
