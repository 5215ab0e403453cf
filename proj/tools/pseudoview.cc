// pseudoview: pseudo-view synthesis tools.
#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "checks.h"
#include "plot.h"
#include "pseudoview/bounds.h"
#include "pseudoview/calib.h"
#include "pseudoview/cascade.h"
#include "pseudoview/confidence.h"
#include "pseudoview/error.h"
#include "pseudoview/inpaint.h"
#include "pseudoview/io.h"
#include "pseudoview/parallel.h"
#include "pseudoview/serialization.h"
#include "pseudoview/warp.h"

#ifndef PSEUDOVIEW_VERSION
#define PSEUDOVIEW_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace pseudoview;

namespace {

// Outputs are produced in memory first and written only once the whole
// command has succeeded. --out names either a directory or, when it carries
// the command's main extension, the main output file; side files then go
// next to it as <stem>_<name>. A prefix target writes <prefix><name>.
class Outputs {
 public:
  Outputs(fs::path out, std::string main_ext = {}, std::string main_name = {})
      : main_ext_(std::move(main_ext)), main_name_(std::move(main_name)) {
    if (!main_ext_.empty() && out.extension() == main_ext_) {
      dir_ = out.parent_path();
      main_file_ = out.filename().string();
      prefix_ = out.stem().string() + "_";
    } else {
      dir_ = std::move(out);
    }
  }
  static Outputs with_prefix(const fs::path& prefix) {
    Outputs o{fs::path{}};
    o.dir_ = prefix.parent_path();
    o.prefix_ = prefix.filename().string();
    o.prefix_mode_ = true;
    return o;
  }
  bool empty() const { return dir_.empty() && !prefix_mode_; }
  void add_main(std::string bytes) {
    if (!main_file_.empty()) {
      files_.emplace_back(main_file_, std::move(bytes));
    } else {
      add(main_name_, std::move(bytes));
    }
  }
  void add(const std::string& name, std::string bytes) {
    files_.emplace_back(prefix_ + name, std::move(bytes));
  }
  void commit() const {
    if (empty()) throw ValidationError("--out is required");
    if (!dir_.empty()) fs::create_directories(dir_);
    for (const auto& [name, bytes] : files_) write_file_atomic(dir_ / name, bytes);
  }
  fs::path path_of(const std::string& name) const { return dir_ / (prefix_ + name); }

 private:
  fs::path dir_;
  std::string main_ext_, main_name_, main_file_, prefix_;
  bool prefix_mode_ = false;
  std::vector<std::pair<std::string, std::string>> files_;
};

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

void require_file(const fs::path& p, const char* flag) {
  if (p.empty()) throw ValidationError(std::string(flag) + " is required");
  if (!fs::exists(p)) throw ValidationError(std::string(flag) + ": no such file: " + p.string());
}

// ------------------------------------------------------------------ warp

struct WarpArgs {
  fs::path image, depth, camera, target, out, out_prefix;
  std::vector<double> offset;
  bool inpaint = false;
  double depth_band = 0.01;
};

int run_warp(const WarpArgs& a) {
  require_file(a.image, "--src-image");
  require_file(a.depth, "--src-depth");
  require_file(a.camera, "--src-cam");
  const ColorImage img = load_png_rgb(a.image);
  const DepthImage depth = load_depth(a.depth);
  require_same_shape(img, depth, ("--src-image " + a.image.string() + " vs --src-depth " + a.depth.string()).c_str());
  const CameraView src = load_camera(a.camera);
  Pose target_pose;
  if (!a.target.empty()) {
    require_file(a.target, "--dst-cam");
    const CameraView tgt = load_camera(a.target);
    if (!(tgt.k == src.k)) throw ValidationError("--dst-cam intrinsics differ from --src-cam");
    target_pose = tgt.pose;
  } else if (a.offset.size() == 3) {
    target_pose = src.pose;
    target_pose.translation += Vec3(a.offset[0], a.offset[1], a.offset[2]);
  } else {
    throw ValidationError("give --dst-cam or --offset TX TY TZ");
  }
  WarpOptions opts;
  opts.depth_band = a.depth_band;
  const Pose rel = relative_pose(src.pose, target_pose);
  const WarpOutput w = forward_warp(img, depth, src.k, rel, opts);

  if (a.out.empty() == a.out_prefix.empty()) throw ValidationError("give exactly one of --out and --out-prefix");
  Outputs out = a.out.empty() ? Outputs::with_prefix(a.out_prefix) : Outputs(a.out);
  out.add("warped.png", encode_png_rgb(w.image));
  out.add("warped_depth.pfm", encode_pfm(w.depth.values()));
  out.add("holes.png", encode_png_mask(w.hole_mask));
  json report = {{"hole_fraction", hole_fraction(w)},
                 {"target", to_json(CameraView{src.k, target_pose})}};
  if (a.inpaint) {
    const InpaintResult r = harmonic_fill(w.image, w.depth, w.hole_mask);
    out.add("inpainted.png", encode_png_rgb(r.image));
    out.add("inpainted_depth.pfm", encode_pfm(r.depth.values()));
    out.add("residual.png", encode_png_mask(r.residual));
  }
  out.add("warp.json", json_text(report));
  out.commit();
  std::cout << report.dump() << "\n";
  return 0;
}

// ------------------------------------------------------------------ bounds

struct BoundsArgs {
  fs::path camera, depth, out;
  double epsilon = 32.0;
  std::optional<double> z_min;
  double t_z = 0.0;
};

int run_bounds(const BoundsArgs& a) {
  require_file(a.camera, "--cam");
  const CameraView cam = load_camera(a.camera);
  std::optional<DepthImage> depth;
  if (!a.depth.empty()) {
    require_file(a.depth, "--depth");
    depth = load_depth(a.depth);
    if (depth->width() != cam.k.width || depth->height() != cam.k.height) {
      throw ValidationError("--depth " + a.depth.string() + ": dimension mismatch " +
                            shape_string(depth->width(), depth->height()) + " vs camera " +
                            shape_string(cam.k.width, cam.k.height));
    }
  }
  double z_min = 1.0;
  if (a.z_min) {
    z_min = *a.z_min;
  } else if (depth) {
    z_min = depth->min_valid();
    if (!std::isfinite(z_min)) throw ValidationError("--depth has no valid pixels");
  } else {
    throw ValidationError("give --z-min or --depth");
  }
  const WarpBudget budget = WarpBudget::make(a.epsilon, z_min, a.t_z);
  TranslationBounds b = a.t_z == 0.0 ? solve_bounds_lateral(budget, cam.k)
                                     : solve_bounds_with_tz(budget, cam.k);
  // Without a depth map the worst case is a plane at z_min.
  const DepthImage certify_on =
      depth ? *depth : DepthImage::constant(cam.k.width, cam.k.height, static_cast<float>(z_min));
  const auto tight = tighten_bounds(certify_on, cam.k, b, a.epsilon);
  if (!tight) throw CascadeError("t_z alone exceeds the displacement budget");
  b = tight->bounds;
  json report = to_json(b, tight->certification.max_disp);
  report["bisection_steps"] = tight->bisection_steps;
  report["epsilon"] = a.epsilon;
  report["z_min"] = z_min;
  Outputs out(a.out, ".json", "bounds.json");
  out.add_main(json_text(report));
  if (!out.empty()) out.commit();
  std::cout << report.dump() << "\n";
  return 0;
}

// ------------------------------------------------------------------ calibrate

struct CalibrateArgs {
  fs::path lidar, camera, disparity, out, report;
  double delta = 0.5;
  std::size_t max_pairs = 50'000;
  std::uint64_t seed = 0;
};

bool is_depth_image(const fs::path& p) {
  return p.extension() == ".pfm" || p.extension() == ".png";
}

int run_calibrate(const CalibrateArgs& a) {
  require_file(a.disparity, "--disparity");
  require_file(a.lidar, "--lidar");
  const DisparityImage disp = load_disparity(a.disparity);
  DepthImage lidar;
  std::size_t skipped = 0;
  if (is_depth_image(a.lidar)) {
    lidar = load_depth(a.lidar);
  } else {
    if (a.camera.empty()) throw ValidationError("--lidar point cloud needs --cam");
    require_file(a.camera, "--cam");
    const CameraView cam = load_camera(a.camera);
    const PointCloud pc = load_pointcloud(a.lidar);
    skipped = pc.skipped_nonfinite;
    if (skipped) std::cerr << "warning: skipped " << skipped << " non-finite point(s)\n";
    lidar = project_pointcloud(pc.points, cam.pose, cam.k);
  }
  require_same_shape(lidar, disp, "LiDAR depth vs --disparity");
  PairOptions po;
  po.max_pairs = a.max_pairs;
  po.seed = a.seed;
  const std::vector<Pair> pairs = build_pairs(lidar, disp, po);
  FitOptions fo;
  fo.delta = a.delta;
  const FitReport report = fit_calibration(pairs, fo);
  const DepthImage calibrated = apply_calibration(disp, report.params);

  json j = to_json(report);
  j["pairs"] = pairs.size();
  j["skipped_nonfinite_points"] = skipped;
  j["delta"] = a.delta;
  j["seed"] = a.seed;
  Outputs out(a.out, ".json", "params.json");
  out.add_main(json_text(to_json(report.params)));
  out.add("pairs.csv", pairs_csv(pairs));
  out.add("calibrated_depth.pfm", encode_pfm(calibrated.values()));
  out.add("fit.png", encode_png_rgb(plot::calibration_fit(pairs, report.params)));
  if (a.report.empty()) {
    out.add("report.json", json_text(j));
  }
  out.commit();
  if (!a.report.empty()) write_file_atomic(a.report, json_text(j));
  std::cout << to_json(report.params).dump() << "\n";
  return 0;
}

// ------------------------------------------------------------------ confidence / loss

struct ConfidenceArgs {
  fs::path rendered, inpainted, out;
  double lambda1 = 0.5;
  std::string l2_mode = "per-pixel";
};

L2Mode parse_l2(const std::string& s) {
  if (s == "per-pixel") return L2Mode::kPerPixel;
  if (s == "scalar") return L2Mode::kScalar;
  throw ValidationError("--l2-mode must be per-pixel or scalar");
}

int run_confidence(const ConfidenceArgs& a) {
  require_file(a.rendered, "--rendered");
  require_file(a.inpainted, "--inpainted");
  const ColorImage r = load_png_rgb(a.rendered);
  const ColorImage i = load_png_rgb(a.inpainted);
  require_same_shape(r, i, "--rendered vs --inpainted");
  const ConfidenceMap w = confidence_weights(r, i, a.lambda1, parse_l2(a.l2_mode));
  const double l_con = confidence_loss(r, i, w);
  Image<float> wf(w.width(), w.height());
  ColorImage wimg(w.width(), w.height());
  double mean = 0.0;
  for (std::size_t p = 0; p < w.size(); ++p) {
    wf[p] = static_cast<float>(w[p]);
    wimg[p] = {wf[p], wf[p], wf[p]};
    mean += w[p];
  }
  mean /= static_cast<double>(w.size());
  const json j = {{"l_con", l_con}, {"mean_weight", mean}, {"lambda1", a.lambda1},
                  {"l2_mode", a.l2_mode}};
  Outputs out(a.out, ".pfm", "confidence.pfm");
  out.add_main(encode_pfm(wf));
  out.add("confidence.png", encode_png_rgb(wimg));
  out.add("confidence.json", json_text(j));
  out.commit();
  std::cout << j.dump() << "\n";
  return 0;
}

struct LossArgs {
  fs::path rendered, gt, rendered_depth, gt_depth, pseudo_rendered, pseudo_gt, out;
  double lambda = 0.8;
  double lambda1 = 0.5;
};

int run_loss(const LossArgs& a) {
  require_file(a.rendered, "--rendered");
  require_file(a.gt, "--gt");
  const ColorImage r = load_png_rgb(a.rendered);
  const ColorImage g = load_png_rgb(a.gt);
  require_same_shape(r, g, "--rendered vs --gt");
  DepthImage rd(r.width(), r.height()), gd(r.width(), r.height());
  if (!a.rendered_depth.empty() || !a.gt_depth.empty()) {
    require_file(a.rendered_depth, "--rendered-depth");
    require_file(a.gt_depth, "--gt-depth");
    rd = load_depth(a.rendered_depth);
    gd = load_depth(a.gt_depth);
  }
  LossBreakdown b = base_loss(r, g, rd, gd, a.lambda);
  double l_con = 0.0;
  if (!a.pseudo_rendered.empty() || !a.pseudo_gt.empty()) {
    require_file(a.pseudo_rendered, "--pseudo-rendered");
    require_file(a.pseudo_gt, "--pseudo-gt");
    const ColorImage pr = load_png_rgb(a.pseudo_rendered);
    const ColorImage pg = load_png_rgb(a.pseudo_gt);
    require_same_shape(pr, pg, "--pseudo-rendered vs --pseudo-gt");
    l_con = confidence_loss(pr, pg, confidence_weights(pr, pg, a.lambda1));
  }
  b = with_confidence(b, l_con);
  const json j = to_json(b);
  Outputs out(a.out, ".json", "loss.json");
  out.add_main(json_text(j));
  if (!out.empty()) out.commit();
  std::cout << j.dump() << "\n";
  return 0;
}

// ------------------------------------------------------------------ cascade-sim

struct CascadeArgs {
  fs::path scene, config, out;
  std::optional<std::uint64_t> seed;
};

int run_cascade_sim(const CascadeArgs& a) {
  require_file(a.scene, "--scene");
  require_file(a.config, "--config");
  if (a.out.empty()) throw ValidationError("--out is required");
  RunConfig rc = load_run_config(a.scene, a.config, a.out);
  if (a.seed) rc.seed = *a.seed;
  const Scene scene = load_scene(rc.scene_path);

  SyntheticSceneRenderer truth(scene);
  std::vector<InputView> inputs;
  for (const CameraView& c : rc.input_cameras) {
    const RenderOutput gt = truth.render(c.pose, c.k);
    inputs.push_back({c.pose, c.k, gt.image, gt.depth});
  }
  SyntheticSceneRenderer renderer(scene);
  const HarmonicInpainter inpainter(rc.cascade.harmonic);
  const CascadeResult result = run_cascade(rc.cascade, renderer, inpainter, inputs);
  const std::string plot = encode_png_rgb(plot::loss_trace(result.trace));

  write_ledger(rc.output_dir, result, rc.seed);
  write_file_atomic(rc.output_dir / "loss_trace.png", plot);
  for (const std::string& d : result.diagnostics) std::cerr << "warning: " << d << "\n";
  std::cout << "pseudo views: " << result.records.size() << ", rounds: " << result.rounds_run
            << ", ledger: " << (rc.output_dir / "ledger.json").string() << "\n";
  return 0;
}

// ------------------------------------------------------------------ selftest

int run_selftest() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  checks::run_all(checks::Scale::kReduced, [&](const checks::CheckResult& r) {
    ok = ok && r.passed;
    std::cout << checks::format_result(r) << std::endl;
  });
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("selftest %s in %.1f s\n", ok ? "passed" : "FAILED", secs);
  return ok ? 0 : 2;
}

int report_error(const std::string& kind, const std::string& message, int code, bool as_json) {
  if (as_json) {
    std::cerr << json{{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}}.dump()
              << "\n";
  } else {
    std::cerr << "error: " << message << "\n";
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudo-view synthesis: depth warping, adaptive bounds, depth calibration, "
               "confidence losses and cascade simulation."};
  app.set_version_flag("--version", std::string("pseudoview ") + PSEUDOVIEW_VERSION);
  bool json_errors = false;
  int threads = 0;
  app.add_flag("--json-errors", json_errors, "Report errors as JSON on stderr");
  app.add_option("--threads", threads, "OpenMP threads (default: all)")->check(CLI::NonNegativeNumber);
  app.require_subcommand(1);

  WarpArgs wa;
  auto* warp = app.add_subcommand("warp", "Forward-warp an image and depth map to another pose");
  warp->add_option("--src-image,--image", wa.image, "Source RGB PNG")->required();
  warp->add_option("--src-depth,--depth", wa.depth, "Source depth (.pfm or 16-bit .png in mm)")->required();
  warp->add_option("--src-cam,--camera", wa.camera, "Source camera JSON")->required();
  warp->add_option("--dst-cam,--target", wa.target, "Target camera JSON");
  warp->add_option("--offset", wa.offset, "Camera-frame translation TX TY TZ instead of --dst-cam")->expected(3);
  warp->add_option("--depth-band", wa.depth_band, "Relative z-buffer blend band");
  warp->add_flag("--inpaint", wa.inpaint, "Also fill holes with the harmonic inpainter");
  warp->add_option("--out", wa.out, "Output directory");
  warp->add_option("--out-prefix", wa.out_prefix, "Output path prefix");

  BoundsArgs ba;
  auto* bounds = app.add_subcommand("bounds", "Solve and certify translation bounds");
  bounds->add_option("--cam,--camera", ba.camera, "Camera JSON")->required();
  bounds->add_option("--epsilon", ba.epsilon, "Displacement budget in pixels");
  bounds->add_option("--z-min", ba.z_min, "Nearest scene depth in meters (default: from --depth)");
  bounds->add_option("--tz,--t-z", ba.t_z, "Fixed forward offset in meters");
  bounds->add_option("--depth", ba.depth, "Depth map to certify against");
  bounds->add_option("--out", ba.out, "Output directory or .json file");

  CalibrateArgs ca;
  auto* calib = app.add_subcommand("calibrate", "Fit depth = c1 / (d + c2) + c3 to LiDAR");
  calib->add_option("--disparity", ca.disparity, "Monocular disparity (.pfm or .png)")->required();
  calib->add_option("--lidar", ca.lidar, "LiDAR points (ASCII xyz or .bin) or sparse depth (.pfm/.png)")->required();
  calib->add_option("--cam,--camera", ca.camera, "Camera JSON for point clouds");
  calib->add_option("--delta", ca.delta, "Huber threshold in meters");
  calib->add_option("--max-pairs", ca.max_pairs, "Pair subsampling limit");
  calib->add_option("--seed", ca.seed, "Subsampling seed");
  calib->add_option("--out", ca.out, "Output directory or params .json file")->required();
  calib->add_option("--report", ca.report, "Fit report JSON path");

  ConfidenceArgs fa;
  auto* conf = app.add_subcommand("confidence", "Confidence map and loss between two images");
  conf->add_option("--rendered", fa.rendered, "Rendered RGB PNG")->required();
  conf->add_option("--inpainted", fa.inpainted, "Inpainted RGB PNG")->required();
  conf->add_option("--lambda1", fa.lambda1, "Weight of the L2 term");
  conf->add_option("--l2-mode", fa.l2_mode, "per-pixel or scalar");
  conf->add_option("--out", fa.out, "Output directory or weight-map .pfm file")->required();

  LossArgs la;
  auto* loss = app.add_subcommand("loss", "Base and total loss for an image pair");
  loss->add_option("--rendered", la.rendered, "Rendered RGB PNG")->required();
  loss->add_option("--gt", la.gt, "Ground-truth RGB PNG")->required();
  loss->add_option("--rendered-depth", la.rendered_depth, "Rendered depth");
  loss->add_option("--gt-depth", la.gt_depth, "Ground-truth depth");
  loss->add_option("--pseudo-rendered", la.pseudo_rendered, "Rendered pseudo view");
  loss->add_option("--pseudo-gt", la.pseudo_gt, "Pseudo ground truth");
  loss->add_option("--lambda", la.lambda, "L1 vs D-SSIM weight");
  loss->add_option("--lambda1", la.lambda1, "Confidence L2 weight");
  loss->add_option("--out", la.out, "Output directory or .json file");

  CascadeArgs sa;
  std::uint64_t seed_value = 0;
  auto* cas = app.add_subcommand("cascade-sim", "Run the cascade on a synthetic plane scene");
  cas->add_option("--scene", sa.scene, "Scene JSON")->required();
  cas->add_option("--config", sa.config, "Cascade JSON")->required();
  cas->add_option("--out", sa.out, "Output directory")->required();
  auto* seed_opt = cas->add_option("--seed", seed_value, "Override the config seed");

  auto* self = app.add_subcommand("selftest", "Run the embedded invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    if (json_errors) return report_error("usage", e.what(), 1, true);
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    std::optional<ThreadLimit> limit;
    if (threads > 0) limit.emplace(threads);
    if (*warp) return run_warp(wa);
    if (*bounds) return run_bounds(ba);
    if (*calib) return run_calibrate(ca);
    if (*conf) return run_confidence(fa);
    if (*loss) return run_loss(la);
    if (*cas) {
      if (*seed_opt) sa.seed = seed_value;
      return run_cascade_sim(sa);
    }
    if (*self) return run_selftest();
  } catch (const ValidationError& e) {
    return report_error("validation", e.what(), 1, json_errors);
  } catch (const std::exception& e) {
    return report_error("runtime", e.what(), 2, json_errors);
  }
  return 1;
}
