// Serial reference kernels against their OpenMP versions.
#include <benchmark/benchmark.h>

#include "oracles.h"
#include "pseudoview/bounds.h"
#include "pseudoview/calib.h"
#include "pseudoview/confidence.h"
#include "pseudoview/inpaint.h"
#include "pseudoview/warp.h"

namespace pv = pseudoview;

namespace {

struct Frame {
  pv::CameraIntrinsics k;
  pv::ColorImage image;
  pv::ColorImage other;
  pv::DepthImage depth;
  pv::Mask holes;
};

const Frame& frame() {
  static const Frame f = [] {
    pv::SplitRng rng(1);
    Frame f;
    f.k = pv::CameraIntrinsics::make(600, 600, 319.5, 239.5, 640, 480);
    f.image = pv::oracle::random_image(640, 480, rng);
    f.other = pv::oracle::random_image(640, 480, rng);
    f.depth = pv::oracle::random_depth(640, 480, 1.0, 0.02, rng);
    f.holes = pv::Mask(640, 480, 0);
    for (int y = 180; y < 300; ++y) {
      for (int x = 260; x < 380; ++x) f.holes.at(x, y) = 1;
    }
    return f;
  }();
  return f;
}

const pv::Pose kRel = pv::Pose::make(pv::Mat3::Identity(), pv::Vec3(0.03, 0.01, 0.02));

template <bool kParallel>
void BM_Warp(benchmark::State& state) {
  const Frame& f = frame();
  for (auto _ : state) {
    auto w = kParallel ? pv::forward_warp(f.image, f.depth, f.k, kRel)
                       : pv::reference::forward_warp(f.image, f.depth, f.k, kRel);
    benchmark::DoNotOptimize(w);
  }
}

template <bool kParallel>
void BM_Certify(benchmark::State& state) {
  const Frame& f = frame();
  for (auto _ : state) {
    auto c = kParallel ? pv::certify_pose(f.depth, f.k, kRel.translation, 32)
                       : pv::reference::certify_pose(f.depth, f.k, kRel.translation, 32);
    benchmark::DoNotOptimize(c);
  }
}

template <bool kParallel>
void BM_Ssim(benchmark::State& state) {
  const Frame& f = frame();
  for (auto _ : state) {
    auto s = kParallel ? pv::ssim(f.image, f.other) : pv::reference::ssim(f.image, f.other);
    benchmark::DoNotOptimize(s);
  }
}

template <bool kParallel>
void BM_Harmonic(benchmark::State& state) {
  const Frame& f = frame();
  for (auto _ : state) {
    auto r = kParallel ? pv::harmonic_fill(f.image, f.depth, f.holes)
                       : pv::reference::harmonic_fill(f.image, f.depth, f.holes);
    benchmark::DoNotOptimize(r);
  }
}

template <bool kParallel>
void BM_CalibObjective(benchmark::State& state) {
  static const auto pairs = [] {
    pv::SplitRng rng(2);
    return pv::oracle::calibration_pairs({500, 2, 1}, 50'000, 50, rng);
  }();
  const pv::CalibParams p{480, 2.1, 0.9};
  for (auto _ : state) {
    double v = kParallel ? pv::calib_objective(p, pairs, 0.5)
                         : pv::reference::calib_objective(p, pairs, 0.5);
    benchmark::DoNotOptimize(v);
  }
}

}  // namespace

BENCHMARK(BM_Warp<false>)->Name("warp/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Warp<true>)->Name("warp/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Certify<false>)->Name("certify/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Certify<true>)->Name("certify/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Ssim<false>)->Name("ssim/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Ssim<true>)->Name("ssim/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Harmonic<false>)->Name("harmonic/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Harmonic<true>)->Name("harmonic/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CalibObjective<false>)->Name("calib_objective/serial")->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_CalibObjective<true>)->Name("calib_objective/omp")->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
