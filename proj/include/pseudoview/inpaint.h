#pragma once

#include "pseudoview/image.h"

namespace pseudoview {

struct InpaintResult {
  ColorImage image;
  DepthImage depth;
  Mask residual;  // holes the inpainter could not fill; subset of the input holes
};

// Hole filler back end. Implementations must return every non-hole pixel
// unchanged (bit-exact) and a residual mask contained in the hole mask.
class Inpainter {
 public:
  virtual ~Inpainter() = default;
  virtual InpaintResult inpaint(const ColorImage& image, const DepthImage& depth,
                                const Mask& holes) const = 0;
};

struct HarmonicOptions {
  double tolerance = 1e-4;  // stop when no pixel moves more than this in a sweep
  int max_sweeps = 500;
};

// Harmonic hole filling: every hole pixel converges to the mean of its 4
// neighbours, with the non-hole pixels as fixed boundary values. Solved
// coarse-to-fine: each level is seeded from the coarser solution (breadth-first
// from the boundary where that leaves gaps) and relaxed with red-black
// Gauss-Seidel sweeps. Color and depth are filled the same way. Hole
// components that touch no valid pixel are left black/invalid and reported in
// the residual mask (this only happens when the whole image is a hole).
InpaintResult harmonic_fill(const ColorImage& image, const DepthImage& depth,
                            const Mask& holes, const HarmonicOptions& options = {});

class HarmonicInpainter final : public Inpainter {
 public:
  explicit HarmonicInpainter(HarmonicOptions options = {}) : options_(options) {}
  InpaintResult inpaint(const ColorImage& image, const DepthImage& depth,
                        const Mask& holes) const override {
    return harmonic_fill(image, depth, holes, options_);
  }

 private:
  HarmonicOptions options_;
};

// Fills nothing; every hole stays in the residual mask.
class NullInpainter final : public Inpainter {
 public:
  InpaintResult inpaint(const ColorImage& image, const DepthImage& depth,
                        const Mask& holes) const override;
};

namespace reference {
// Plain sweep-by-sweep implementation of harmonic_fill.
InpaintResult harmonic_fill(const ColorImage& image, const DepthImage& depth,
                            const Mask& holes, const HarmonicOptions& options = {});
}  // namespace reference

}  // namespace pseudoview
