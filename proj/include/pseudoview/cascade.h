#pragma once

#include <string>
#include <vector>

#include "pseudoview/bounds.h"
#include "pseudoview/confidence.h"
#include "pseudoview/error.h"
#include "pseudoview/geometry.h"
#include "pseudoview/image.h"
#include "pseudoview/inpaint.h"
#include "pseudoview/renderer.h"
#include "pseudoview/warp.h"

namespace pseudoview {

struct InputView {
  Pose pose;
  CameraIntrinsics k;
  ColorImage image;
  DepthImage depth;
};

enum class AnchorMode {
  kReanchor,       // every round starts from an input view
  kContinueChain,  // a round starts from the previous round's last pseudo view
};

struct CascadeConfig {
  int total_iterations = 12'000;
  std::vector<int> warp_steps{3'000, 6'000, 9'000};
  int warmup_iterations = 3'000;
  int views_per_round = 3;
  int input_view_count = 1;
  WarpBudget budget;
  double lambda = 0.8;
  double lambda1 = 0.5;
  // Camera-frame exploration direction per round (cycled), unit length.
  std::vector<Vec3> directions{Vec3::UnitX()};
  AnchorMode anchor_mode = AnchorMode::kReanchor;
  WarpOptions warp;
  HarmonicOptions harmonic;

  // Warm-up and warp schedule of the reference training recipe (warm-up
  // 3000, rounds every 3000 for three cycles) divided by `divisor`.
  static CascadeConfig scaled_schedule(int divisor);
  // Throws ValidationError on an inconsistent schedule or budget.
  void validate() const;
};

class CertificationFailure : public CascadeError {
 public:
  using CascadeError::CascadeError;
};

struct ParentRef {
  bool is_input = true;
  int index = 0;
  bool operator==(const ParentRef&) const = default;
};

struct PseudoViewRecord {
  int index = 0;  // position in the run's ledger
  int round = 0;
  Pose pose;
  CameraIntrinsics k;
  ParentRef parent;
  Vec3 offset = Vec3::Zero();  // camera-frame translation from the parent
  ColorImage image;            // pseudo ground truth after inpainting
  DepthImage depth;
  Mask residual_mask;          // holes left after inpainting
  Mask warp_hole_mask;         // holes of the warp before inpainting
  double certified_max_disp = 0.0;
  double hole_fraction = 0.0;
};

struct LossTraceRow {
  int iteration = 0;
  double l_ori = 0.0;
  double l_con = 0.0;
  double total = 0.0;
  bool pseudo_active = false;
};

struct CascadeResult {
  std::string renderer_state;
  std::vector<PseudoViewRecord> records;
  std::vector<LossTraceRow> trace;
  int rounds_run = 0;
  std::vector<std::string> diagnostics;
};

struct RoundPlan {
  Pose anchor_pose;
  CameraIntrinsics k;
  ParentRef anchor_parent;
  Vec3 direction = Vec3::UnitX();
  int round = 0;
  int first_index = 0;
};

// One cascade round: renders the anchor, then for j = 1..F' warps the
// previous view (the rendered anchor for j = 1, otherwise record j-1's
// inpainted output) to a pose one certified step further along the
// direction, inpaints the holes and stores the result. The step is solved
// once per round from the anchor's nearest depth. Throws
// CertificationFailure when a step cannot be certified and CascadeError when
// the inpainter breaks its contract.
std::vector<PseudoViewRecord> cascade_round(Renderer& renderer, const Inpainter& inpainter,
                                            const RoundPlan& plan,
                                            const CascadeConfig& config);

// Full schedule. Iterations in warp_steps run a round first; every
// iteration feeds the mean base loss over the input views to the renderer,
// then, once pseudo views exist, the mean confidence loss over them.
CascadeResult run_cascade(const CascadeConfig& config, Renderer& renderer,
                          const Inpainter& inpainter,
                          const std::vector<InputView>& input_views);

// Input view whose camera center lies farthest along the exploration
// direction expressed in world coordinates (of the first view). Ties go to
// the lower index.
int select_anchor(const std::vector<InputView>& views, const Vec3& direction);

}  // namespace pseudoview
