#pragma once

#include <string>

#include "pseudoview/geometry.h"
#include "pseudoview/image.h"

namespace pseudoview {

struct RenderOutput {
  ColorImage image;
  DepthImage depth;
};

struct LossFeedback {
  enum class Kind { kInputViews, kPseudoViews };
  int iteration = 0;
  Kind kind = Kind::kInputViews;
  double loss = 0.0;
};

// Scene representation back end. render() must be deterministic for a fixed
// internal state.
class Renderer {
 public:
  virtual ~Renderer() = default;
  virtual RenderOutput render(const Pose& pose, const CameraIntrinsics& k) const = 0;
  virtual void update(const LossFeedback& feedback) = 0;
  // Short description of the internal state, returned at the end of a run.
  virtual std::string state_token() const = 0;
};

}  // namespace pseudoview
