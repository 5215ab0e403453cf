#pragma once

#include <cstdint>
#include <vector>

#include "pseudoview/inpaint.h"

namespace pseudoview::detail {

enum : std::uint8_t {
  kAbsent = 0,    // not part of the problem
  kFixed = 1,     // boundary value
  kPending = 2,   // hole, no value yet
  kAssigned = 3,  // hole, has a value
};

// Multi-channel scalar field on a grid with per-pixel roles.
struct FillGrid {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> values;        // width * height * channels
  std::vector<std::uint8_t> state;   // width * height

  bool has_value(std::size_t i) const { return state[i] == kFixed || state[i] == kAssigned; }
};

// Red-black Gauss-Seidel: every assigned pixel becomes the mean of its
// neighbours that have values, until the largest change in a sweep is below
// tolerance or max_sweeps is reached. Returns the sweeps run.
int relax_parallel(FillGrid& grid, double tolerance, int max_sweeps);
int relax_serial(FillGrid& grid, double tolerance, int max_sweeps);

using RelaxFn = int (*)(FillGrid&, double, int);

// Coarse-to-fine harmonic fill of every pending pixel reachable from a fixed
// one. Unreachable pending pixels stay pending.
void harmonic_solve(FillGrid& grid, const HarmonicOptions& options, RelaxFn relax);

InpaintResult harmonic_fill_with(const ColorImage& image, const DepthImage& depth,
                                 const Mask& holes, const HarmonicOptions& options,
                                 RelaxFn relax);

}  // namespace pseudoview::detail
