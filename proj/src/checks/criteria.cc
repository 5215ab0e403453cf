#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <random>
#include <unistd.h>

#include "checks.h"
#include "oracles.h"
#include "pseudoview/bounds.h"
#include "pseudoview/calib.h"
#include "pseudoview/confidence.h"
#include "pseudoview/inpaint.h"
#include "pseudoview/io.h"
#include "pseudoview/parallel.h"
#include "pseudoview/warp.h"

namespace pseudoview::checks {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string g(double v) { return fmt("%.3g", v); }

CheckResult finish(int id, const char* name, bool passed, std::string detail,
                   Clock::time_point t0) {
  return {id, name, passed, std::move(detail), seconds_since(t0)};
}

// Channel-mean absolute difference restricted to pixels where use[i] != 0.
double masked_mae(const ColorImage& a, const ColorImage& b, const Mask& use) {
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!use[i]) continue;
    for (int c = 0; c < 3; ++c) s += std::abs(double(a[i][c]) - double(b[i][c]));
    ++n;
  }
  return n ? s / (3.0 * n) : 0.0;
}

// Share of used pixels whose largest channel error is within tol.
double within_fraction(const ColorImage& a, const ColorImage& b, const Mask& use, double tol) {
  std::size_t n = 0, hit = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!use[i]) continue;
    double e = 0.0;
    for (int c = 0; c < 3; ++c) e = std::max(e, std::abs(double(a[i][c]) - double(b[i][c])));
    hit += e <= tol;
    ++n;
  }
  return n ? double(hit) / double(n) : 0.0;
}

Mask not_holes(const Mask& holes) {
  Mask m(holes.width(), holes.height(), 0);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = holes[i] ? 0 : 1;
  return m;
}

}  // namespace

CheckResult bound_soundness(Scale scale) {
  const auto t0 = Clock::now();
  const bool full = scale == Scale::kFull;
  const int w = full ? 640 : 320;
  const int h = full ? 480 : 240;
  const int maps = full ? 100 : 10;
  const int trans = full ? 100 : 20;
  ThreadLimit one(1);
  SplitRng root(0xB0B05EEDULL);

  long long violations = 0;
  long long mismatches = 0;
  double worst_ratio = 0.0;
  for (int m = 0; m < maps; ++m) {
    SplitRng rng = root.split(static_cast<std::uint64_t>(m));
    const double f = rng.uniform(300.0, 900.0);
    const CameraIntrinsics k =
        CameraIntrinsics::make(f, f * rng.uniform(0.9, 1.1), (w - 1) / 2.0, (h - 1) / 2.0, w, h);
    const double eps = rng.uniform(4.0, 64.0);
    const double z_min = static_cast<float>(rng.uniform(0.5, 20.0));
    const DepthImage depth = oracle::random_depth(w, h, z_min, 0.05, rng);
    double oracle_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < depth.size(); ++i) {
      if (depth.valid(i)) oracle_min = std::min(oracle_min, double(depth.value(i)));
    }
    const TranslationBounds b = solve_bounds_lateral(WarpBudget::make(eps, z_min), k);
    for (int t = 0; t < trans; ++t) {
      double sx, sy;
      if (t < 4) {
        sx = (t & 1) ? 1.0 : -1.0;
        sy = (t & 2) ? 1.0 : -1.0;
      } else {
        sx = rng.uniform(-1.0, 1.0);
        sy = rng.uniform(-1.0, 1.0);
      }
      const Vec3 dt(sx * b.max_t_x, sy * b.max_t_y, 0.0);
      const Certification c = certify_pose(depth, k, dt, eps);
      if (!c.ok) ++violations;
      const double expect =
          std::max(k.fx * std::abs(dt.x()), k.fy * std::abs(dt.y())) / oracle_min;
      if (std::abs(c.max_disp - expect) > 1e-9 * std::max(1.0, expect)) ++mismatches;
      worst_ratio = std::max(worst_ratio, c.max_disp / eps);
    }
  }

  // Tightness on a constant plane at z_min with translations on the bound.
  const CameraIntrinsics k = CameraIntrinsics::make(520.0, 480.0, (w - 1) / 2.0, (h - 1) / 2.0, w, h);
  const double eps = 32.0;
  const double z_min = 2.5;
  const TranslationBounds b = solve_bounds_lateral(WarpBudget::make(eps, z_min), k);
  const DepthImage plane = DepthImage::constant(w, h, static_cast<float>(z_min));
  double tight_err = 0.0;
  bool tight_ok = true;
  for (const Vec3& dt : {Vec3(b.max_t_x, 0, 0), Vec3(0, -b.max_t_y, 0),
                         Vec3(-b.max_t_x, b.max_t_y, 0)}) {
    const Certification c = certify_pose(plane, k, dt, eps);
    tight_err = std::max(tight_err, std::abs(c.max_disp - eps));
    tight_ok = tight_ok && c.ok;
  }
  const double secs = seconds_since(t0);
  const bool time_ok = !full || secs <= 30.0;
  const bool passed = violations == 0 && mismatches == 0 && tight_ok && tight_err <= 1e-9 && time_ok;
  return finish(1, "adaptive-bound soundness", passed,
                std::to_string(maps) + "x" + std::to_string(trans) + " at " + std::to_string(w) +
                    "x" + std::to_string(h) + ": violations " + std::to_string(violations) +
                    ", oracle mismatches " + std::to_string(mismatches) + ", worst disp/eps " +
                    fmt("%.12f", worst_ratio) + ", tightness error " + g(tight_err) +
                    " px, " + fmt("%.1f", secs) + " s (limit 30 s)",
                t0);
}

CheckResult displacement_equivalence(Scale scale) {
  const auto t0 = Clock::now();
  const int n = scale == Scale::kFull ? 10'000 : 2'000;
  SplitRng rng(0xD15B1ACEULL);
  double worst_closed = 0.0;
  double worst_pipeline = 0.0;
  double worst_homog = 0.0;
  for (int i = 0; i < n; ++i) {
    const int w = 64 + static_cast<int>(rng.uniform(0.0, 1900.0));
    const int h = 48 + static_cast<int>(rng.uniform(0.0, 1000.0));
    const CameraIntrinsics k = CameraIntrinsics::make(
        rng.uniform(200.0, 1500.0), rng.uniform(200.0, 1500.0), rng.uniform(0.0, w - 1.0),
        rng.uniform(0.0, h - 1.0), w, h);
    const double z = rng.uniform(0.5, 100.0);
    const double u = rng.uniform(0.0, w - 1.0);
    const double v = rng.uniform(0.0, h - 1.0);
    const Vec3 p((u - k.cx) * z / k.fx, (v - k.cy) * z / k.fy, z);
    const Vec3 dt(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0),
                  (i % 4 == 0) ? 0.0 : rng.uniform(-0.4 * z, 2.0));
    const Vec2 ref = oracle::displacement(p, dt, k);
    const Displacement d = pixel_displacement(p, dt, k);
    worst_closed = std::max({worst_closed, std::abs(d.du - ref.x()), std::abs(d.dv - ref.y())});

    const Vec2 pu = oracle::project(p, k);
    const Displacement dh =
        pixel_displacement_homogeneous(pu.x() * p.z(), pu.y() * p.z(), p.z(), dt, k);
    worst_homog = std::max({worst_homog, std::abs(dh.du - ref.x()), std::abs(dh.dv - ref.y())});

    // Library pipeline: unproject, rigid transform, project.
    const Pixel px = project(p, k);
    const Point3 back = unproject(px, p.z(), k);
    const Pixel moved = project(forward_warp_point(back, Pose::make(Mat3::Identity(), dt)), k);
    worst_pipeline = std::max({worst_pipeline, std::abs(d.du - (moved.u - px.u)),
                               std::abs(d.dv - (moved.v - px.v))});
  }
  const double worst = std::max({worst_closed, worst_pipeline, worst_homog});
  return finish(2, "displacement-formula equivalence", worst <= 1e-9,
                std::to_string(n) + " tuples: max |closed - oracle| " + g(worst_closed) +
                    " px, homogeneous " + g(worst_homog) + " px, vs pipeline " +
                    g(worst_pipeline) + " px (tolerance 1e-9)",
                t0);
}

namespace {

CalibParams random_truth(SplitRng& rng) {
  return {rng.uniform(50.0, 200.0), rng.uniform(-0.5, 2.0), rng.uniform(-0.2, 0.5)};
}

// Replaces about a tenth of the LiDAR depths with gross errors.
void add_outliers(std::vector<Pair>& pairs, SplitRng& rng) {
  for (Pair& p : pairs) {
    if (rng.uniform() >= 0.1) continue;
    p.lidar_depth *= rng.uniform() < 0.5 ? rng.uniform(1.5, 3.0) : rng.uniform(0.2, 0.6);
  }
}

}  // namespace

CheckResult calibration_recovery(Scale scale) {
  const auto t0 = Clock::now();
  const bool full = scale == Scale::kFull;
  const int trials = full ? 50 : 10;
  const std::size_t n = full ? 2000 : 1000;
  const int need_wins = full ? 48 : 9;
  SplitRng root(0xCA11B8A7EULL);
  ThreadLimit one(1);

  double worst_clean = 0.0;
  double worst_huber = 0.0;
  int wins = 0;
  int unconverged = 0;
  for (int t = 0; t < trials; ++t) {
    SplitRng rng = root.split(static_cast<std::uint64_t>(t));
    const CalibParams truth = random_truth(rng);
    std::vector<Pair> pairs = oracle::calibration_pairs(truth, n, 40.0, rng);
    const FitReport clean = fit_calibration(pairs);
    worst_clean = std::max(worst_clean, oracle::relative_param_error(clean.params, truth));
    unconverged += !clean.converged;

    add_outliers(pairs, rng);
    const FitReport huber = fit_calibration(pairs);
    FitOptions ls_opts;
    ls_opts.delta = std::numeric_limits<double>::infinity();
    const FitReport ls = fit_calibration(pairs, ls_opts);
    const double eh = oracle::relative_param_error(huber.params, truth);
    const double el = oracle::relative_param_error(ls.params, truth);
    worst_huber = std::max(worst_huber, eh);
    wins += eh < el;
  }

  // Noiseless draws over the whole parameter box.
  double worst_wide = 0.0;
  for (int t = 0; t < trials; ++t) {
    SplitRng rng = root.split(static_cast<std::uint64_t>(500 + t));
    const oracle::CalibDraw draw = oracle::wide_calib_draw(rng, 60.0);
    const auto pairs = oracle::calibration_pairs(draw.truth, n, draw.d_max, rng);
    const FitReport fit = fit_calibration(pairs);
    worst_wide = std::max(worst_wide, oracle::relative_param_error(fit.params, draw.truth));
  }

  // Classical model: c2 = c3 = 0 gives depth = b f / d.
  const double bf = 0.54 * 721.5377;
  std::vector<Pair> classical;
  for (int i = 0; i < 500; ++i) {
    const double d = 1.0 + 0.25 * i;
    classical.push_back({bf / d, d, 0, i});
  }
  const FitReport cf = fit_calibration(classical);
  const double classical_err = std::max({std::abs(cf.params.c1 - bf) / bf,
                                         std::abs(cf.params.c2), std::abs(cf.params.c3)});

  // Timing at 50,000 pairs with outliers.
  SplitRng trng = root.split(999);
  const CalibParams truth = random_truth(trng);
  std::vector<Pair> big = oracle::calibration_pairs(truth, 50'000, 40.0, trng);
  add_outliers(big, trng);
  const auto tf = Clock::now();
  const FitReport big_fit = fit_calibration(big);
  const double fit_secs = seconds_since(tf);
  const double big_err = oracle::relative_param_error(big_fit.params, truth);

  const bool passed = worst_clean <= 1e-5 && worst_wide <= 1e-5 && worst_huber <= 1e-2 && wins >= need_wins &&
                      classical_err <= 1e-12 && fit_secs <= 5.0 && big_err <= 1e-2;
  return finish(3, "calibration recovery", passed,
                std::to_string(trials) + " draws: noiseless worst rel err " + g(worst_clean) +
                    " (tol 1e-5), full-box noiseless worst " + g(worst_wide) + ", outliers worst Huber rel err " + g(worst_huber) +
                    " (tol 1e-2), Huber beats LS " + std::to_string(wins) + "/" +
                    std::to_string(trials) + " (need " + std::to_string(need_wins) +
                    "), classical c1 rel err " + g(classical_err) + ", 50k-pair fit " +
                    fmt("%.2f", fit_secs) + " s rel err " + g(big_err) +
                    (unconverged ? ", unconverged " + std::to_string(unconverged) : ""),
                t0);
}

CheckResult jacobian_check(Scale scale) {
  const auto t0 = Clock::now();
  const int n = scale == Scale::kFull ? 100 : 50;
  SplitRng rng(0x7AC0B1A7ULL);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const CalibParams p = oracle::wide_calib_draw(rng, 40.0).truth;
    const double d = rng.uniform(std::max(1.0, 1.0 - p.c2), 40.0);
    const double lidar = rng.uniform(1.0, 80.0);
    const auto analytic = calib_jacobian(p, d);
    const auto base = p.as_array();
    for (int c = 0; c < 3; ++c) {
      const double step = 1e-6 * std::max(1.0, std::abs(base[static_cast<std::size_t>(c)]));
      auto plus = base;
      auto minus = base;
      plus[static_cast<std::size_t>(c)] += step;
      minus[static_cast<std::size_t>(c)] -= step;
      const CalibParams pp{plus[0], plus[1], plus[2]};
      const CalibParams pm{minus[0], minus[1], minus[2]};
      const double fd = (calib_residual(pp, lidar, d) - calib_residual(pm, lidar, d)) /
                        (plus[static_cast<std::size_t>(c)] - minus[static_cast<std::size_t>(c)]);
      const double a = analytic[static_cast<std::size_t>(c)];
      worst = std::max(worst, std::abs(a - fd) / std::max(std::abs(a), 1e-300));
    }
  }
  return finish(4, "Jacobian check", worst <= 1e-5,
                std::to_string(n) + " points: worst component relative error " + g(worst) +
                    " (tolerance 1e-5)",
                t0);
}

CheckResult warp_fidelity(Scale scale) {
  const auto t0 = Clock::now();
  const bool full = scale == Scale::kFull;
  SplitRng root(0x3A4B5C6DULL);
  std::string detail;
  bool passed = true;

  // Identity warp.
  {
    const int w = full ? 640 : 160;
    const int h = full ? 480 : 120;
    SplitRng rng = root.split(1);
    const ColorImage img = oracle::random_image(w, h, rng);
    const DepthImage depth = oracle::random_depth(w, h, 1.0, 0.1, rng);
    const CameraIntrinsics k = CameraIntrinsics::make(500, 500, (w - 1) / 2.0, (h - 1) / 2.0, w, h);
    const WarpOutput out = forward_warp(img, depth, k, Pose::identity());
    bool lossless = true;
    for (std::size_t i = 0; i < img.size(); ++i) {
      if (depth.valid(i)) {
        lossless = lossless && out.image[i] == img[i] && out.depth.valid(i) &&
                   out.depth.value(i) == depth.value(i) && !out.hole_mask[i];
      } else {
        lossless = lossless && out.hole_mask[i] && !out.depth.valid(i);
      }
    }
    const WarpOutput ref = reference::forward_warp(img, depth, k, Pose::identity());
    const bool same = ref.image == out.image && ref.depth == out.depth && ref.hole_mask == out.hole_mask;
    passed = passed && lossless && same;
    detail += std::string("identity ") + (lossless ? "bit-lossless" : "LOSSY") +
              (same ? "" : " (parallel != serial)");
  }

  // Plane round trip.
  {
    const int w = full ? 640 : 320;
    const int h = full ? 480 : 240;
    const double f = 500.0 * w / 640.0;
    const CameraIntrinsics k = CameraIntrinsics::make(f, f, (w - 1) / 2.0, (h - 1) / 2.0, w, h);
    const Pose a = Pose::identity();
    const Pose b = Pose::make(Mat3::Identity(), Vec3(7.3 * 10.0 / f, 1.85 * 10.0 / f, 0.0));
    struct Trip {
      double fwd, back, close;
    };
    // Tilted sinusoid plane with the given texture period in pixels.
    const auto round_trip = [&](double period_px) {
      Scene scene;
      Plane p;
      p.point = {0.0, 0.0, 10.0};
      p.normal = Vec3(0.25, -0.1, -1.0).normalized();
      p.texture.kind = Texture::Kind::kSinusoid;
      p.texture.cell_size = period_px * 10.0 / f;
      scene.planes.push_back(p);
      SyntheticSceneRenderer renderer(scene);
      const RenderOutput ra = renderer.render(a, k);
      const RenderOutput rb = renderer.render(b, k);
      const WarpOutput ab = forward_warp(ra.image, ra.depth, k, relative_pose(a, b));
      const WarpOutput ba = forward_warp(ab.image, ab.depth, k, relative_pose(b, a));
      const Mask seen = not_holes(ba.hole_mask);
      return Trip{masked_mae(ab.image, rb.image, not_holes(ab.hole_mask)),
                  masked_mae(ba.image, ra.image, seen),
                  within_fraction(ba.image, ra.image, seen, 1.0 / 255.0)};
    };
    // Bilinear splatting low-passes twice on a round trip, so the 1/255 tail
    // depends on texture frequency; MAE is checked on the sharper texture.
    const Trip sharp = round_trip(40.0);
    const Trip smooth = round_trip(60.0);
    const bool ok = sharp.fwd <= 2.0 / 255.0 && sharp.back <= 2.0 / 255.0 && smooth.close >= 0.95;
    passed = passed && ok;
    detail += "; plane " + std::to_string(w) + "x" + std::to_string(h) + " (40 px texture) MAE warp vs render " +
              g(sharp.fwd * 255.0) + "/255, round trip " + g(sharp.back * 255.0) + "/255 (limit 2/255), " +
              fmt("%.1f", 100.0 * sharp.close) + "% within 1/255; 60 px texture " +
              fmt("%.1f", 100.0 * smooth.close) + "% within 1/255 (limit 95%)";

    // Fronto-parallel shift of 7.3 px: exactly 7 hole columns.
    Scene flat;
    Plane q;
    q.point = {0.0, 0.0, 10.0};
    q.normal = {0.0, 0.0, -1.0};
    q.texture.kind = Texture::Kind::kSolid;
    flat.planes.push_back(q);
    SyntheticSceneRenderer fr(flat);
    const RenderOutput fa = fr.render(a, k);
    const Pose bx = Pose::make(Mat3::Identity(), Vec3(7.3 * 10.0 / f, 0.0, 0.0));
    const WarpOutput fx = forward_warp(fa.image, fa.depth, k, relative_pose(a, bx));
    const double frac = hole_fraction(fx);
    const double expect = 7.0 / w;
    const bool holes_ok = std::abs(frac - expect) < 1e-12;
    passed = passed && holes_ok;
    detail += ", hole fraction " + g(frac) + (holes_ok ? " = " : " != ") + "7/" + std::to_string(w);
  }

  // Z-buffer against the brute-force scatter oracle.
  {
    int depth_mismatch = 0;
    int hole_mismatch = 0;
    double color_diff = 0.0;
    for (int t = 0; t < 5; ++t) {
      SplitRng rng = root.split(100 + static_cast<std::uint64_t>(t));
      const int w = 32, h = 32;
      const ColorImage img = oracle::random_image(w, h, rng);
      DepthImage depth(w, h);
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const bool near = ((x / 6) + (y / 5)) % 3 == 0;
          if (rng.uniform() < 0.05) continue;
          depth.set(x, y, static_cast<float>((near ? 2.0 : 5.0) + rng.uniform(0.0, 0.3)));
        }
      }
      const CameraIntrinsics k = CameraIntrinsics::make(30, 30, 15.5, 15.5, w, h);
      const Pose rel = Pose::make(axis_angle(Vec3(0.1, 1.0, 0.2).normalized(), rng.uniform(-0.05, 0.05)),
                                  Vec3(rng.uniform(-0.4, 0.4), rng.uniform(-0.3, 0.3),
                                       rng.uniform(-0.2, 0.2)));
      const WarpOutput lib = forward_warp(img, depth, k, rel);
      const WarpOutput ref = oracle::brute_force_warp(img, depth, k, rel, WarpOptions{});
      for (std::size_t i = 0; i < img.size(); ++i) {
        hole_mismatch += lib.hole_mask[i] != ref.hole_mask[i];
        depth_mismatch += lib.depth.valid(i) != ref.depth.valid(i) ||
                          lib.depth.value(i) != ref.depth.value(i);
        for (int c = 0; c < 3; ++c) {
          color_diff = std::max(color_diff, std::abs(double(lib.image[i][c]) - ref.image[i][c]));
        }
      }
    }
    const bool ok = depth_mismatch == 0 && hole_mismatch == 0 && color_diff <= 1e-6;
    passed = passed && ok;
    detail += "; z-buffer 32x32 x5: depth mismatches " + std::to_string(depth_mismatch) +
              ", hole mismatches " + std::to_string(hole_mismatch) + ", max color diff " +
              g(color_diff);
  }
  return finish(5, "warp fidelity", passed, detail, t0);
}

namespace {

ColorImage box_blur(const ColorImage& a) {
  ColorImage out(a.width(), a.height());
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      Rgb s{0, 0, 0};
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (!a.contains(x + dx, y + dy)) continue;
          for (int c = 0; c < 3; ++c) s[c] += a.at(x + dx, y + dy)[c];
          ++n;
        }
      }
      for (int c = 0; c < 3; ++c) out.at(x, y)[c] = s[c] / n;
    }
  }
  return out;
}

ColorImage smooth_image(int w, int h, SplitRng& rng) {
  ColorImage img(w, h);
  const double fx = rng.uniform(0.05, 0.4), fy = rng.uniform(0.05, 0.4);
  const double ph = rng.uniform(0.0, 6.3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        img.at(x, y)[c] = static_cast<float>(0.5 + 0.4 * std::sin(fx * x + ph + c) * std::cos(fy * y));
      }
    }
  }
  return img;
}

}  // namespace

CheckResult ssim_reference(Scale scale) {
  const auto t0 = Clock::now();
  const int pairs = scale == Scale::kFull ? 20 : 6;
  SplitRng root(0x551A1234ULL);
  double worst = 0.0;
  double worst_serial = 0.0;
  bool self_one = true;
  for (int i = 0; i < pairs; ++i) {
    SplitRng rng = root.split(static_cast<std::uint64_t>(i));
    const int w = 16 + static_cast<int>(rng.uniform(0.0, 48.0));
    const int h = 12 + static_cast<int>(rng.uniform(0.0, 36.0));
    const ColorImage a = (i % 2) ? oracle::random_image(w, h, rng) : smooth_image(w, h, rng);
    ColorImage b;
    switch (i % 5) {
      case 0: b = a; break;
      case 1: b = box_blur(a); break;
      case 2: b = oracle::random_image(w, h, rng); break;
      case 3:
        b = a;
        for (auto& px : b.data()) {
          for (float& c : px) c = std::clamp(c * 0.8f + 0.1f, 0.0f, 1.0f);
        }
        break;
      default:
        b = a;
        for (auto& px : b.data()) {
          for (float& c : px) c = std::clamp(c + static_cast<float>(rng.uniform(-0.1, 0.1)), 0.0f, 1.0f);
        }
    }
    const SsimResult lib = ssim(a, b);
    worst = std::max(worst, std::abs(lib.mean - oracle::ssim_mean(a, b)));
    worst_serial = std::max(worst_serial, std::abs(lib.mean - reference::ssim(a, b).mean));
    const SsimResult self = ssim(a, a);
    for (double v : self.map.data()) self_one = self_one && v == 1.0;
    self_one = self_one && self.mean == 1.0;
  }
  const bool passed = worst <= 1e-6 && worst_serial <= 1e-6 && self_one;
  return finish(6, "SSIM reference", passed,
                std::to_string(pairs) + " pairs: max |ssim - oracle| " + g(worst) +
                    ", vs serial reference " + g(worst_serial) + " (tol 1e-6), ssim(a,a) " +
                    (self_one ? "== 1 everywhere" : "NOT identically 1"),
                t0);
}

CheckResult confidence_semantics(Scale scale) {
  const auto t0 = Clock::now();
  const int fixtures = scale == Scale::kFull ? 50 : 15;
  SplitRng root(0xC0F1DE7CEULL);
  double w_min = 1.0, w_max = 0.0;
  bool identical_ok = true;
  int downweighted = 0;
  double l1_err = 0.0;
  for (int i = 0; i < fixtures; ++i) {
    SplitRng rng = root.split(static_cast<std::uint64_t>(i));
    const int w = 40, h = 32;
    const ColorImage rendered = smooth_image(w, h, rng);

    // Range over arbitrary pairs, including saturated images.
    ColorImage other = (i % 3 == 0) ? ColorImage(w, h, Rgb{1, 1, 1}) : oracle::random_image(w, h, rng);
    for (double l1 : {0.0, 0.3, 0.5, 1.0}) {
      for (L2Mode mode : {L2Mode::kPerPixel, L2Mode::kScalar}) {
        const ConfidenceMap wm = confidence_weights(rendered, other, l1, mode);
        for (double v : wm.data()) {
          w_min = std::min(w_min, v);
          w_max = std::max(w_max, v);
        }
      }
    }

    // Identical pair.
    const ConfidenceMap same = confidence_weights(rendered, rendered, 0.5);
    for (double v : same.data()) identical_ok = identical_ok && v == 1.0;
    identical_ok = identical_ok && confidence_loss(rendered, rendered, same) == 0.0;

    // Discrepant region.
    ColorImage inpainted = rendered;
    const int rx = 4 + static_cast<int>(rng.uniform(0.0, 16.0));
    const int ry = 4 + static_cast<int>(rng.uniform(0.0, 12.0));
    const int rw = 8 + static_cast<int>(rng.uniform(0.0, 8.0));
    const int rh = 6 + static_cast<int>(rng.uniform(0.0, 8.0));
    Mask region(w, h, 0);
    for (int y = ry; y < std::min(h, ry + rh); ++y) {
      for (int x = rx; x < std::min(w, rx + rw); ++x) {
        region.at(x, y) = 1;
        for (int c = 0; c < 3; ++c) {
          inpainted.at(x, y)[c] = static_cast<float>(rng.uniform());
        }
      }
    }
    const ConfidenceMap wm = confidence_weights(rendered, inpainted, 0.5);
    double in_sum = 0.0, out_sum = 0.0;
    int in_n = 0, out_n = 0;
    for (std::size_t p = 0; p < wm.size(); ++p) {
      (region[p] ? in_sum : out_sum) += wm[p];
      (region[p] ? in_n : out_n) += 1;
    }
    downweighted += (in_sum / in_n) < (out_sum / out_n);

    // W = 1 gives plain L1.
    const ConfidenceMap ones(w, h, 1.0);
    l1_err = std::max(l1_err, std::abs(confidence_loss(rendered, inpainted, ones) -
                                       oracle::mean_abs_difference(rendered, inpainted)));
  }
  const bool range_ok = w_min >= 0.0 && w_max <= 1.0;
  const bool passed = range_ok && identical_ok && downweighted == fixtures && l1_err <= 1e-12;
  return finish(7, "confidence semantics", passed,
                "W range [" + g(w_min) + ", " + g(w_max) + "], identical pair " +
                    (identical_ok ? "W == 1, L_con = 0" : "FAILED") + ", region down-weighted " +
                    std::to_string(downweighted) + "/" + std::to_string(fixtures) +
                    ", |L_con(W=1) - L1| " + g(l1_err) + " (tol 1e-12)",
                t0);
}

namespace {

bool same_tree(const fs::path& a, const fs::path& b, std::string* why) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(a)) names.push_back(e.path().filename().string());
  std::size_t count_b = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(b)) ++count_b;
  if (names.size() != count_b) {
    *why = "file counts differ";
    return false;
  }
  for (const std::string& n : names) {
    if (!fs::exists(b / n) || read_file(a / n) != read_file(b / n)) {
      *why = n + " differs";
      return false;
    }
  }
  return true;
}

}  // namespace

CheckResult cascade_end_to_end(Scale scale) {
  const auto t0 = Clock::now();
  const bool full = scale == Scale::kFull;
  const int w = full ? 320 : 160;
  const int h = full ? 240 : 120;
  ThreadLimit one(1);
  const Scene scene = demo_scene();
  const CameraView cam = demo_camera(w, h);
  const CascadeConfig config = demo_cascade_config();
  const HarmonicInpainter inpainter(config.harmonic);

  SyntheticSceneRenderer truth(scene);
  const RenderOutput gt = truth.render(cam.pose, cam.k);
  const std::vector<InputView> inputs{{cam.pose, cam.k, gt.image, gt.depth}};

  const auto tr = Clock::now();
  SyntheticSceneRenderer renderer(scene);
  const CascadeResult result = run_cascade(config, renderer, inpainter, inputs);
  const double run_secs = seconds_since(tr);

  std::vector<std::string> problems;
  const int f = config.views_per_round;
  const int rounds = static_cast<int>(config.warp_steps.size());
  if (result.rounds_run != rounds) problems.push_back("rounds_run " + std::to_string(result.rounds_run));
  if (static_cast<int>(result.records.size()) != f * rounds) {
    problems.push_back("record count " + std::to_string(result.records.size()));
  }
  if (!result.diagnostics.empty()) problems.push_back("diagnostic: " + result.diagnostics.front());
  if (static_cast<int>(result.trace.size()) != config.total_iterations) problems.push_back("trace length");
  const int first = config.warp_steps.front();
  for (const LossTraceRow& row : result.trace) {
    if (row.pseudo_active != (row.iteration >= first)) {
      problems.push_back("pseudo loss active at iteration " + std::to_string(row.iteration));
      break;
    }
  }
  const int expected_updates = config.total_iterations + (config.total_iterations - first + 1);
  if (renderer.update_count() != expected_updates) {
    problems.push_back("update calls " + std::to_string(renderer.update_count()));
  }

  double worst_chain = 0.0;
  double worst_vs_render = 0.0;
  bool preserved = true;
  for (std::size_t i = 0; i < result.records.size() && problems.empty(); ++i) {
    const PseudoViewRecord& r = result.records[i];
    const int j = static_cast<int>(i) % f;
    const ParentRef want = j == 0 ? ParentRef{true, 0} : ParentRef{false, static_cast<int>(i) - 1};
    if (r.index != static_cast<int>(i) || r.round != static_cast<int>(i) / f || !(r.parent == want)) {
      problems.push_back("ledger entry " + std::to_string(i) + " has wrong index/round/parent");
      break;
    }
    if (!(r.certified_max_disp <= config.budget.epsilon)) {
      problems.push_back("view " + std::to_string(i) + " certified " + g(r.certified_max_disp));
    }
    const Pose parent_pose = r.parent.is_input ? inputs[0].pose : result.records[i - 1].pose;
    const Vec3 step = r.pose.translation - parent_pose.translation;
    if ((step - r.offset).norm() > 1e-12 || (r.offset - result.records[i - j].offset).norm() != 0.0) {
      problems.push_back("view " + std::to_string(i) + " step differs from the round's offset");
    }
    // Re-warp the parent's stored content into this view.
    RenderOutput parent = r.parent.is_input
                              ? truth.render(parent_pose, cam.k)
                              : RenderOutput{result.records[i - 1].image, result.records[i - 1].depth};
    const WarpOutput wp = forward_warp(parent.image, parent.depth, cam.k,
                                       relative_pose(parent_pose, r.pose), config.warp);
    const Mask vis = not_holes(wp.hole_mask);
    worst_chain = std::max(worst_chain, masked_mae(wp.image, r.image, vis));
    for (std::size_t p = 0; p < vis.size(); ++p) {
      if (!vis[p]) continue;
      preserved = preserved && wp.image[p] == r.image[p] && wp.depth.value(p) == r.depth.value(p) &&
                  !r.residual_mask[p];
    }
    const RenderOutput direct = truth.render(r.pose, cam.k);
    worst_vs_render = std::max(worst_vs_render, masked_mae(direct.image, r.image, vis));
  }
  if (worst_chain > 2.0 / 255.0) problems.push_back("chain consistency " + g(worst_chain * 255) + "/255");
  if (!preserved) problems.push_back("non-hole pixels changed by the inpainter");

  // Byte-identical reruns.
  const fs::path base = fs::temp_directory_path() /
                        ("pseudoview_rerun_" + std::to_string(::getpid()) + "_" +
                         std::to_string(Clock::now().time_since_epoch().count()));
  bool identical = false;
  std::string why;
  try {
    SyntheticSceneRenderer r1(scene), r2(scene);
    write_ledger(base / "a", run_cascade(config, r1, inpainter, inputs), 42);
    write_ledger(base / "b", run_cascade(config, r2, inpainter, inputs), 42);
    identical = same_tree(base / "a", base / "b", &why);
  } catch (const std::exception& e) {
    why = e.what();
  }
  std::error_code ec;
  fs::remove_all(base, ec);
  if (!identical) problems.push_back("reruns differ: " + why);
  if (full && run_secs > 60.0) problems.push_back("run took " + fmt("%.1f", run_secs) + " s");

  std::string detail = std::to_string(result.records.size()) + " records in " +
                       std::to_string(result.rounds_run) + " rounds at " + std::to_string(w) +
                       "x" + std::to_string(h) + ", chain MAE " + g(worst_chain * 255) +
                       "/255, pseudo GT vs direct render on warped pixels " +
                       g(worst_vs_render * 255) + "/255, non-hole " +
                       (preserved ? "bit-exact" : "CHANGED") + ", reruns " +
                       (identical ? "byte-identical" : "DIFFER") + ", run " +
                       fmt("%.1f", run_secs) + " s (limit 60 s)";
  for (const std::string& p : problems) detail += "; " + p;
  return finish(8, "cascade end-to-end", problems.empty(), detail, t0);
}

CheckResult harmonic_inpainter(Scale) {
  const auto t0 = Clock::now();
  // Single hole in a constant field.
  const int w = 96, h = 80;
  const Rgb v{0.3f, 0.55f, 0.8f};
  ColorImage flat(w, h, v);
  DepthImage flat_d = DepthImage::constant(w, h, 5.0f);
  Mask one(w, h, 0);
  one.at(40, 30) = 1;
  flat.at(40, 30) = {0, 0, 0};
  flat_d.invalidate(40, 30);
  const InpaintResult single = harmonic_fill(flat, flat_d, one);
  const bool single_ok = single.image.at(40, 30) == v && single.depth.valid(40, 30) &&
                         single.depth.value(40, 30) == 5.0f && !single.residual.at(40, 30);

  // Disk in a linear gradient.
  const auto color_at = [&](int x, int y) {
    return Rgb{static_cast<float>(0.2 + 0.6 * x / w), static_cast<float>(0.1 + 0.5 * y / h),
               static_cast<float>(0.3 + 0.2 * x / w + 0.3 * y / h)};
  };
  const auto depth_at = [](int x, int y) { return 4.0 + 0.005 * x + 0.003 * y; };
  ColorImage grad(w, h);
  DepthImage grad_d(w, h);
  Mask disk(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const bool in = (x - 50) * (x - 50) + (y - 38) * (y - 38) <= 12 * 12;
      disk.at(x, y) = in;
      grad.at(x, y) = in ? Rgb{0, 0, 0} : color_at(x, y);
      if (!in) grad_d.set(x, y, static_cast<float>(depth_at(x, y)));
    }
  }
  const InpaintResult filled = harmonic_fill(grad, grad_d, disk);
  const InpaintResult serial = reference::harmonic_fill(grad, grad_d, disk);
  double worst = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!disk.at(x, y)) continue;
      const Rgb want = color_at(x, y);
      for (int c = 0; c < 3; ++c) {
        worst = std::max(worst, std::abs(double(filled.image.at(x, y)[c]) - double(want[c])));
      }
      worst = std::max(worst, std::abs(double(filled.depth.value(x, y)) - depth_at(x, y)));
    }
  }
  const bool same = filled.image == serial.image && filled.depth == serial.depth;
  const bool passed = single_ok && worst <= 1e-3 && same;
  return finish(9, "harmonic inpainter", passed,
                std::string("single hole ") + (single_ok ? "exact" : "NOT exact") +
                    ", gradient disk r=12 max error " + g(worst) + " (tol 1e-3)" +
                    (same ? "" : ", parallel != serial"),
                t0);
}

std::vector<CheckResult> run_all(Scale scale,
                                 const std::function<void(const CheckResult&)>& on_result) {
  using Fn = CheckResult (*)(Scale);
  static constexpr Fn kChecks[] = {bound_soundness,   displacement_equivalence,
                                   calibration_recovery, jacobian_check,
                                   warp_fidelity,     ssim_reference,
                                   confidence_semantics, cascade_end_to_end,
                                   harmonic_inpainter};
  std::vector<CheckResult> out;
  for (Fn fn : kChecks) {
    CheckResult r;
    const auto t0 = Clock::now();
    try {
      r = fn(scale);
    } catch (const std::exception& e) {
      r.id = static_cast<int>(out.size()) + 1;
      r.name = "check " + std::to_string(r.id);
      r.passed = false;
      r.detail = std::string("threw: ") + e.what();
      r.seconds = seconds_since(t0);
    }
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_result(const CheckResult& r) {
  char head[128];
  std::snprintf(head, sizeof head, "%s %2d %s (%.2f s): ", r.passed ? "PASS" : "FAIL", r.id,
                r.name.c_str(), r.seconds);
  return head + r.detail;
}

}  // namespace pseudoview::checks
