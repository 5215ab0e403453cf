#include "pseudoview/calib.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "pseudoview/error.h"
#include "pseudoview/parallel.h"
#include "pseudoview/rng.h"

namespace pseudoview {

std::vector<Pair> build_pairs(const DepthImage& lidar_depth, const DisparityImage& disparity,
                              const PairOptions& options) {
  require_same_shape(lidar_depth, disparity, "build_pairs: LiDAR depth vs disparity");
  std::vector<Pair> all;
  for (int i = 0; i < lidar_depth.height(); ++i) {
    for (int j = 0; j < lidar_depth.width(); ++j) {
      if (!lidar_depth.valid(j, i) || !disparity.valid(j, i)) continue;
      const double z = lidar_depth.value(j, i);
      if (!(z > 0.0)) continue;
      all.push_back({z, static_cast<double>(disparity.value(j, i)), i, j});
    }
  }
  if (all.size() < options.min_pairs) {
    throw ValidationError("build_pairs: insufficient data, " + std::to_string(all.size()) +
                          " valid LiDAR/disparity pixels, need at least " +
                          std::to_string(options.min_pairs));
  }
  if (options.max_pairs == 0 || all.size() <= options.max_pairs) return all;

  const double stride =
      static_cast<double>(all.size()) / static_cast<double>(options.max_pairs);
  SplitRng rng = SplitRng(options.seed).split(0x7061697273ULL);
  const double phase = rng.uniform() * stride;
  std::vector<Pair> picked;
  picked.reserve(options.max_pairs);
  for (std::size_t k = 0; k < options.max_pairs; ++k) {
    const auto idx = static_cast<std::size_t>(std::floor(phase + static_cast<double>(k) * stride));
    picked.push_back(all[std::min(idx, all.size() - 1)]);
  }
  return picked;
}

double huber_loss(double r, double delta) {
  const double a = std::abs(r);
  if (a <= delta) return 0.5 * r * r;
  return delta * (a - 0.5 * delta);
}

double huber_influence(double r, double delta) {
  if (std::abs(r) <= delta) return r;
  return r > 0.0 ? delta : -delta;
}

double calib_residual(const CalibParams& p, double lidar_depth, double disparity) {
  return lidar_depth - p.c1 / (disparity + p.c2) - p.c3;
}

std::array<double, 3> calib_jacobian(const CalibParams& p, double disparity) {
  const double inv = 1.0 / (disparity + p.c2);
  return {-inv, p.c1 * inv * inv, -1.0};
}

namespace {

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double upper = v[mid];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lower + upper);
}

// Normal-equation pieces of the IRLS step: objective, gradient and
// Gauss-Newton Hessian with Huber weights.
struct Accumulated {
  double objective = 0.0;
  Eigen::Vector3d gradient = Eigen::Vector3d::Zero();
  Eigen::Matrix3d hessian = Eigen::Matrix3d::Zero();
};

constexpr std::size_t kBlock = 4096;

// The gradient scales with the objective, so the tolerance does too.
bool gradient_small(const Accumulated& acc, const FitOptions& options) {
  return acc.gradient.cwiseAbs().maxCoeff() < options.gradient_tol * std::max(1.0, acc.objective);
}

Accumulated accumulate(const CalibParams& p, const std::vector<Pair>& pairs, double delta) {
  const std::size_t n = pairs.size();
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  // objective, 3 gradient, 6 hessian entries per block
  std::vector<std::array<double, 10>> partial(blocks);
#pragma omp parallel for schedule(static)
  for (long long b = 0; b < static_cast<long long>(blocks); ++b) {
    std::array<double, 10> s{};
    const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
    const std::size_t hi = std::min(n, lo + kBlock);
    for (std::size_t i = lo; i < hi; ++i) {
      const double r = calib_residual(p, pairs[i].lidar_depth, pairs[i].disparity);
      const auto jac = calib_jacobian(p, pairs[i].disparity);
      const double a = std::abs(r);
      const double w = a <= delta ? 1.0 : delta / a;
      const double psi = huber_influence(r, delta);
      s[0] += huber_loss(r, delta);
      s[1] += psi * jac[0];
      s[2] += psi * jac[1];
      s[3] += psi * jac[2];
      s[4] += w * jac[0] * jac[0];
      s[5] += w * jac[0] * jac[1];
      s[6] += w * jac[0] * jac[2];
      s[7] += w * jac[1] * jac[1];
      s[8] += w * jac[1] * jac[2];
      s[9] += w * jac[2] * jac[2];
    }
    partial[static_cast<std::size_t>(b)] = s;
  }
  std::array<double, 10> t{};
  for (const auto& s : partial) {
    for (int k = 0; k < 10; ++k) t[k] += s[k];
  }
  Accumulated acc;
  acc.objective = t[0];
  acc.gradient << t[1], t[2], t[3];
  acc.hessian << t[4], t[5], t[6], t[5], t[7], t[8], t[6], t[8], t[9];
  return acc;
}

// True when moving c2 from `from` to `to` keeps every pair on the same side
// of the pole and clear of the guard band.
bool pole_safe(const std::vector<Pair>& pairs, double from, double to) {
  for (const Pair& q : pairs) {
    const double a = q.disparity + from;
    const double b = q.disparity + to;
    if (std::abs(b) < kPoleGuard || (a > 0.0) != (b > 0.0)) return false;
  }
  return true;
}

void fill_statistics(FitReport& report, const std::vector<Pair>& pairs, double delta) {
  std::vector<double> abs_r(pairs.size());
  double sq = 0.0;
  std::size_t inliers = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double r = calib_residual(report.params, pairs[i].lidar_depth, pairs[i].disparity);
    abs_r[i] = std::abs(r);
    if (abs_r[i] <= delta) {
      sq += r * r;
      ++inliers;
    }
  }
  report.inlier_count = inliers;
  report.inlier_rmse = inliers ? std::sqrt(sq / static_cast<double>(inliers)) : 0.0;
  std::sort(abs_r.begin(), abs_r.end());
  const auto pct = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(abs_r.size()))) - 1;
    return abs_r[std::min(idx, abs_r.size() - 1)];
  };
  report.residual_percentiles = {pct(0.50), pct(0.90), pct(0.99)};
}

}  // namespace

CalibParams initial_guess(const std::vector<Pair>& pairs) {
  if (pairs.empty()) throw ValidationError("initial_guess: no pairs");
  std::vector<double> products(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    products[i] = pairs[i].lidar_depth * pairs[i].disparity;
  }
  return {median_of(std::move(products)), 0.0, 0.0};
}

double calib_objective(const CalibParams& p, const std::vector<Pair>& pairs, double delta) {
  return deterministic_sum(pairs.size(), [&](std::size_t i) {
    return huber_loss(calib_residual(p, pairs[i].lidar_depth, pairs[i].disparity), delta);
  });
}

FitReport fit_calibration(const std::vector<Pair>& pairs, const FitOptions& options,
                          const std::optional<CalibParams>& init) {
  if (pairs.empty()) throw ValidationError("fit_calibration: no pairs");
  if (!(options.delta > 0.0)) {
    throw ValidationError("fit_calibration: Huber delta must be positive");
  }
  bool varied = false;
  for (const Pair& q : pairs) {
    if (!(q.lidar_depth > 0.0) || !std::isfinite(q.lidar_depth) || !std::isfinite(q.disparity)) {
      throw ValidationError("fit_calibration: pair (" + std::to_string(q.row) + ", " +
                            std::to_string(q.col) + ") has invalid values");
    }
    varied = varied || q.disparity != pairs.front().disparity;
  }
  if (!varied) {
    throw NumericalError(
        "fit_calibration: rank-deficient problem, all pairs share one disparity value");
  }

  FitReport report;
  CalibParams p = init ? *init : initial_guess(pairs);
  for (const Pair& q : pairs) {
    if (std::abs(q.disparity + p.c2) < kPoleGuard) {
      throw NumericalError("fit_calibration: initial parameters put a pair on the pole");
    }
  }

  const double delta = options.delta;
  Accumulated acc = accumulate(p, pairs, delta);
  double lambda = options.initial_damping;
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    if (acc.gradient.cwiseAbs().maxCoeff() < options.gradient_tol || acc.objective == 0.0) {
      report.converged = true;
      break;
    }
    // Marquardt scaling: damp each direction by its own curvature.
    Eigen::Matrix3d damped = acc.hessian;
    for (int k = 0; k < 3; ++k) {
      damped(k, k) += lambda * std::max(acc.hessian(k, k), 1e-12);
    }
    const Eigen::Vector3d step = damped.ldlt().solve(-acc.gradient);
    if (!step.allFinite()) {
      lambda *= 10.0;
      continue;
    }
    const CalibParams trial{p.c1 + step[0], p.c2 + step[1], p.c3 + step[2]};
    if (trial.c1 == 0.0 || !pole_safe(pairs, p.c2, trial.c2)) {
      lambda *= 10.0;
      continue;
    }
    const double trial_objective = calib_objective(trial, pairs, delta);
    if (trial_objective < acc.objective) {
      const double decrease = (acc.objective - trial_objective) / acc.objective;
      p = trial;
      acc = accumulate(p, pairs, delta);
      lambda = std::max(lambda / 10.0, 1e-12);
      if (decrease < options.relative_decrease_tol) {
        report.converged = gradient_small(acc, options);
        ++it;
        break;
      }
    } else {
      lambda *= 10.0;
      if (lambda > 1e16) {
        // No descent direction left at machine precision.
        report.converged = gradient_small(acc, options);
        ++it;
        break;
      }
    }
  }

  report.params = p;
  report.objective = acc.objective;
  report.gradient_norm = acc.gradient.cwiseAbs().maxCoeff();
  report.iterations = it;
  fill_statistics(report, pairs, delta);
  return report;
}

DepthImage apply_calibration(const DisparityImage& disparity, const CalibParams& params) {
  if (params.c1 == 0.0) throw ValidationError("apply_calibration: c1 must be non-zero");
  DepthImage out(disparity.width(), disparity.height());
  const long long n = static_cast<long long>(disparity.size());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    if (!disparity.valid(idx)) continue;
    const double den = disparity.value(idx) + params.c2;
    if (std::abs(den) < kPoleGuard) continue;
    const double z = params.c1 / den + params.c3;
    const auto zf = static_cast<float>(z);
    if (std::isfinite(zf) && zf > 0.0f) out.set(idx, zf);
  }
  return out;
}

namespace reference {

double calib_objective(const CalibParams& p, const std::vector<Pair>& pairs, double delta) {
  double s = 0.0;
  for (const Pair& q : pairs) s += huber_loss(calib_residual(p, q.lidar_depth, q.disparity), delta);
  return s;
}

}  // namespace reference

}  // namespace pseudoview
