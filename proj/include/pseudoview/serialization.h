#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pseudoview/bounds.h"
#include "pseudoview/calib.h"
#include "pseudoview/cascade.h"
#include "pseudoview/confidence.h"
#include "pseudoview/geometry.h"
#include "pseudoview/scene.h"

namespace pseudoview {

using nlohmann::json;

// One camera: intrinsics plus world-to-camera pose.
struct CameraView {
  CameraIntrinsics k;
  Pose pose;
};

// {fx, fy, cx, cy, width, height, rotation (row-major 9), translation (3)}.
json to_json(const CameraView& view);
CameraView camera_from_json(const json& j);
CameraView load_camera(const std::filesystem::path& path);
void save_camera(const std::filesystem::path& path, const CameraView& view);

json to_json(const CalibParams& p);
CalibParams calib_params_from_json(const json& j);
json to_json(const FitReport& r);
json to_json(const LossBreakdown& b);
json to_json(const TranslationBounds& b, double certified_max_disp);

// {"planes": [{point, normal, texture, extent}]}. texture is "checkerboard",
// "solid", or an object {type, ...}; image textures are resolved relative to
// base_dir.
Scene scene_from_json(const json& j, const std::filesystem::path& base_dir = {});
Scene load_scene(const std::filesystem::path& path);

CascadeConfig cascade_config_from_json(const json& j);

// Everything a cascade-sim run needs.
struct RunConfig {
  std::filesystem::path scene_path;
  std::filesystem::path config_path;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
  CascadeConfig cascade;
  std::vector<CameraView> input_cameras;
  std::optional<CalibParams> calib_override;

  // Throws ValidationError when a referenced input path does not exist or the
  // cascade settings are inconsistent.
  void validate() const;
};

// Reads the cascade JSON: schedule and budget fields, "input_views" (camera
// objects), optional "seed" and "calibration".
RunConfig load_run_config(const std::filesystem::path& scene_path,
                          const std::filesystem::path& config_path,
                          const std::filesystem::path& output_dir);

// ledger.json, loss_trace.csv, and per-view view_XXX_{image.png,depth.pfm,
// mask.png,holes.png} under dir.
void write_ledger(const std::filesystem::path& dir, const CascadeResult& result,
                  std::uint64_t seed);
std::string ledger_json_text(const CascadeResult& result, std::uint64_t seed);
std::string loss_trace_csv(const std::vector<LossTraceRow>& trace);
std::string pairs_csv(const std::vector<Pair>& pairs);

// %.17g
std::string format_double(double v);

}  // namespace pseudoview
