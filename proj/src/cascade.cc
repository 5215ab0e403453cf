#include "pseudoview/cascade.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <string>

namespace pseudoview {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void check_inpaint_contract(const WarpOutput& warp, const InpaintResult& r, int index) {
  const std::string who = "inpainter (pseudo view " + std::to_string(index) + ")";
  if (r.image.width() != warp.image.width() || r.image.height() != warp.image.height() ||
      r.depth.width() != warp.depth.width() || r.depth.height() != warp.depth.height() ||
      r.residual.width() != warp.hole_mask.width() ||
      r.residual.height() != warp.hole_mask.height()) {
    throw CascadeError(who + ": output shape differs from its input");
  }
  for (std::size_t i = 0; i < warp.hole_mask.size(); ++i) {
    if (warp.hole_mask[i]) continue;
    if (r.residual[i]) throw CascadeError(who + ": residual mask outside the hole mask");
    if (r.image[i] != warp.image[i] || r.depth.valid(i) != warp.depth.valid(i) ||
        r.depth.value(i) != warp.depth.value(i)) {
      throw CascadeError(who + ": modified a non-hole pixel at index " + std::to_string(i));
    }
  }
}

TranslationBounds round_bounds(const DepthImage& anchor_depth, const CameraIntrinsics& k,
                               const CascadeConfig& config) {
  const double nearest = anchor_depth.min_valid();
  if (!std::isfinite(nearest)) {
    throw CertificationFailure("anchor render has no valid depth");
  }
  WarpBudget budget = config.budget;
  budget.z_min = nearest;
  TranslationBounds initial;
  try {
    initial = budget.fixed_t_z == 0.0 ? solve_bounds_lateral(budget, k)
                                      : solve_bounds_with_tz(budget, k);
  } catch (const ValidationError& e) {
    throw CertificationFailure(std::string("no admissible step: ") + e.what());
  }
  const auto tight = tighten_bounds(anchor_depth, k, initial, budget.epsilon);
  if (!tight) {
    throw CertificationFailure("forward offset t_z = " + fmt(budget.fixed_t_z) +
                               " alone exceeds the budget of " + fmt(budget.epsilon) + " px");
  }
  return tight->bounds;
}

}  // namespace

CascadeConfig CascadeConfig::scaled_schedule(int divisor) {
  if (divisor < 1) throw ValidationError("schedule divisor must be >= 1");
  CascadeConfig c;
  c.total_iterations = std::max(1, 12'000 / divisor);
  c.warmup_iterations = std::max(1, 3'000 / divisor);
  c.warp_steps = {std::max(1, 3'000 / divisor), std::max(1, 6'000 / divisor),
                  std::max(1, 9'000 / divisor)};
  c.warp_steps.erase(std::unique(c.warp_steps.begin(), c.warp_steps.end()), c.warp_steps.end());
  return c;
}

void CascadeConfig::validate() const {
  if (total_iterations < 1) throw ValidationError("cascade: total_iterations must be >= 1");
  if (warmup_iterations < 1) throw ValidationError("cascade: warmup_iterations must be >= 1");
  if (views_per_round < 1) throw ValidationError("cascade: views_per_round must be >= 1");
  if (input_view_count < 1) throw ValidationError("cascade: input_view_count must be >= 1");
  for (std::size_t i = 0; i < warp_steps.size(); ++i) {
    const int t = warp_steps[i];
    if (t < 1 || t >= total_iterations) {
      throw ValidationError("cascade: warp step " + std::to_string(t) + " outside [1, " +
                            std::to_string(total_iterations) + ")");
    }
    if (i > 0 && t <= warp_steps[i - 1]) {
      throw ValidationError("cascade: warp_steps must be strictly increasing");
    }
  }
  // The first round may coincide with the end of warm-up.
  if (!warp_steps.empty() && warmup_iterations > warp_steps.front()) {
    throw ValidationError("cascade: warmup_iterations " + std::to_string(warmup_iterations) +
                          " is after the first warp step " +
                          std::to_string(warp_steps.front()));
  }
  budget.validate();
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValidationError("cascade: lambda outside [0, 1]");
  if (!(lambda1 >= 0.0 && lambda1 <= 1.0)) {
    throw ValidationError("cascade: lambda1 outside [0, 1]");
  }
  if (directions.empty()) throw ValidationError("cascade: no exploration directions");
  for (const Vec3& d : directions) {
    if (!d.allFinite() || std::abs(d.norm() - 1.0) > 1e-9) {
      throw ValidationError("cascade: exploration directions must have unit length");
    }
  }
  if (!(warp.depth_band >= 0.0) || !(warp.weight_floor > 0.0)) {
    throw ValidationError("cascade: warp options need depth_band >= 0 and weight_floor > 0");
  }
  if (!(harmonic.tolerance > 0.0) || harmonic.max_sweeps < 1) {
    throw ValidationError("cascade: harmonic options need tolerance > 0 and max_sweeps >= 1");
  }
}

int select_anchor(const std::vector<InputView>& views, const Vec3& direction) {
  if (views.empty()) throw ValidationError("select_anchor: no input views");
  const Vec3 world_dir = views.front().pose.rotation.transpose() * direction;
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < views.size(); ++i) {
    const double s = views[i].pose.camera_center().dot(world_dir);
    if (s > best_score) {
      best_score = s;
      best = static_cast<int>(i);
    }
  }
  return best;
}

std::vector<PseudoViewRecord> cascade_round(Renderer& renderer, const Inpainter& inpainter,
                                            const RoundPlan& plan,
                                            const CascadeConfig& config) {
  const CameraIntrinsics& k = plan.k;
  RenderOutput anchor = renderer.render(plan.anchor_pose, k);
  const TranslationBounds bounds = round_bounds(anchor.depth, k, config);
  const Vec3 offset = pseudo_pose_offset(bounds, plan.direction);

  std::vector<PseudoViewRecord> records;
  records.reserve(static_cast<std::size_t>(config.views_per_round));
  Pose prev_pose = plan.anchor_pose;
  const ColorImage* prev_image = &anchor.image;
  const DepthImage* prev_depth = &anchor.depth;

  for (int j = 1; j <= config.views_per_round; ++j) {
    const int index = plan.first_index + j - 1;
    const Pose pose = generate_pseudo_pose(prev_pose, bounds, plan.direction);
    const Pose rel = relative_pose(prev_pose, pose);
    const Certification cert =
        certify_pose(*prev_depth, k, rel, config.budget.epsilon,
                     rel.is_pure_translation() ? CertifyMode::kClosedForm
                                               : CertifyMode::kFullPipeline);
    if (!cert.ok) {
      throw CertificationFailure("pseudo view " + std::to_string(index) + " (round " +
                                 std::to_string(plan.round) + ", step " + std::to_string(j) +
                                 "): max displacement " + fmt(cert.max_disp) +
                                 " px exceeds the budget of " + fmt(config.budget.epsilon) +
                                 " px");
    }
    WarpOutput warp = forward_warp(*prev_image, *prev_depth, k, rel, config.warp);
    InpaintResult filled = inpainter.inpaint(warp.image, warp.depth, warp.hole_mask);
    check_inpaint_contract(warp, filled, index);

    PseudoViewRecord rec;
    rec.index = index;
    rec.round = plan.round;
    rec.pose = pose;
    rec.k = k;
    rec.parent = j == 1 ? plan.anchor_parent : ParentRef{false, index - 1};
    rec.offset = offset;
    rec.certified_max_disp = cert.max_disp;
    rec.hole_fraction = hole_fraction(warp);
    rec.image = std::move(filled.image);
    rec.depth = std::move(filled.depth);
    rec.residual_mask = std::move(filled.residual);
    rec.warp_hole_mask = std::move(warp.hole_mask);
    records.push_back(std::move(rec));

    prev_pose = pose;
    prev_image = &records.back().image;
    prev_depth = &records.back().depth;
  }
  return records;
}

CascadeResult run_cascade(const CascadeConfig& config, Renderer& renderer,
                          const Inpainter& inpainter,
                          const std::vector<InputView>& input_views) {
  config.validate();
  if (input_views.empty()) throw ValidationError("cascade: at least one input view is required");
  if (static_cast<int>(input_views.size()) != config.input_view_count) {
    throw ValidationError("cascade: input_view_count is " +
                          std::to_string(config.input_view_count) + " but " +
                          std::to_string(input_views.size()) + " views were given");
  }
  for (std::size_t i = 0; i < input_views.size(); ++i) {
    const InputView& v = input_views[i];
    const std::string what = "input view " + std::to_string(i);
    v.k.validate();
    v.pose.validate();
    require_same_shape(v.image, v.depth, (what + ": image vs depth").c_str());
    if (v.image.width() != v.k.width || v.image.height() != v.k.height) {
      throw ValidationError(what + ": dimension mismatch " + shape_string(v.image.width(), v.image.height()) +
                            " vs intrinsics " + shape_string(v.k.width, v.k.height));
    }
  }

  CascadeResult result;
  const std::set<int> steps(config.warp_steps.begin(), config.warp_steps.end());
  // Records of the last completed round, for continue-chain anchoring.
  int last_round_end = -1;

  for (int t = 1; t <= config.total_iterations; ++t) {
    if (steps.count(t)) {
      const int round = result.rounds_run;
      ++result.rounds_run;
      RoundPlan plan;
      plan.round = round;
      plan.direction = config.directions[static_cast<std::size_t>(round) % config.directions.size()];
      plan.first_index = static_cast<int>(result.records.size());
      if (config.anchor_mode == AnchorMode::kContinueChain && last_round_end >= 0) {
        const PseudoViewRecord& last = result.records[static_cast<std::size_t>(last_round_end)];
        plan.anchor_pose = last.pose;
        plan.k = last.k;
        plan.anchor_parent = {false, last.index};
      } else {
        const int a = select_anchor(input_views, plan.direction);
        plan.anchor_pose = input_views[static_cast<std::size_t>(a)].pose;
        plan.k = input_views[static_cast<std::size_t>(a)].k;
        plan.anchor_parent = {true, a};
      }
      try {
        auto recs = cascade_round(renderer, inpainter, plan, config);
        for (auto& r : recs) result.records.push_back(std::move(r));
        last_round_end = static_cast<int>(result.records.size()) - 1;
      } catch (const CertificationFailure& e) {
        result.diagnostics.push_back("iteration " + std::to_string(t) + ", round " +
                                     std::to_string(round) + " aborted: " + e.what());
      }
    }

    LossTraceRow row;
    row.iteration = t;
    double l_ori = 0.0;
    for (const InputView& v : input_views) {
      const RenderOutput r = renderer.render(v.pose, v.k);
      l_ori += base_loss(r.image, v.image, r.depth, v.depth, config.lambda).l_ori;
    }
    row.l_ori = l_ori / static_cast<double>(input_views.size());
    renderer.update({t, LossFeedback::Kind::kInputViews, row.l_ori});

    if (!result.records.empty()) {
      double l_con = 0.0;
      for (const PseudoViewRecord& rec : result.records) {
        const RenderOutput r = renderer.render(rec.pose, rec.k);
        const ConfidenceMap w = confidence_weights(r.image, rec.image, config.lambda1);
        l_con += confidence_loss(r.image, rec.image, w);
      }
      row.l_con = l_con / static_cast<double>(result.records.size());
      row.pseudo_active = true;
      renderer.update({t, LossFeedback::Kind::kPseudoViews, row.l_con});
    }
    LossBreakdown b;
    b.l_ori = row.l_ori;
    row.total = total_loss(b, row.l_con);
    result.trace.push_back(row);
  }
  result.renderer_state = renderer.state_token();
  return result;
}

}  // namespace pseudoview
