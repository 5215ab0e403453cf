#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pseudoview/cascade.h"
#include "pseudoview/scene.h"
#include "pseudoview/serialization.h"

namespace pseudoview::checks {

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

// kFull runs every check at the sizes the acceptance criteria state;
// kReduced is the quick variant embedded in `pseudoview selftest`.
enum class Scale { kFull, kReduced };

CheckResult bound_soundness(Scale scale);
CheckResult displacement_equivalence(Scale scale);
CheckResult calibration_recovery(Scale scale);
CheckResult jacobian_check(Scale scale);
CheckResult warp_fidelity(Scale scale);
CheckResult ssim_reference(Scale scale);
CheckResult confidence_semantics(Scale scale);
CheckResult cascade_end_to_end(Scale scale);
CheckResult harmonic_inpainter(Scale scale);

// Criteria 1-9 in order; on_result is called as each finishes.
std::vector<CheckResult> run_all(Scale scale,
                                 const std::function<void(const CheckResult&)>& on_result = {});

// "PASS  3 calibration recovery (1.2 s): ..."
std::string format_result(const CheckResult& r);

// Two-plane demo scene: a sinusoid backdrop at z = 12 and a checkered panel
// at z = 6, seen from the identity pose.
Scene demo_scene();
CameraView demo_camera(int width, int height);
// F' = 3, two rounds in opposite lateral directions, short schedule.
CascadeConfig demo_cascade_config();

}  // namespace pseudoview::checks
