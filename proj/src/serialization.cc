#include "pseudoview/serialization.h"

#include <cstdio>
#include <set>

#include "pseudoview/error.h"
#include "pseudoview/io.h"

namespace pseudoview {

namespace {

namespace fs = std::filesystem;

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : j.items()) {
    if (!ok.count(item.key())) throw ValidationError(where + ": unknown key '" + item.key() + "'");
  }
}

const json& require(const json& j, const char* key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) throw ValidationError(where + ": missing key '" + key + "'");
  return *it;
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ValidationError(where + ": expected a number");
  return j.get<double>();
}

long long integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ValidationError(where + ": expected an integer");
  return j.get<long long>();
}

template <int N>
Eigen::Matrix<double, N, 1> vec(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != N) {
    throw ValidationError(where + ": expected an array of " + std::to_string(N) + " numbers");
  }
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) v[i] = number(j[static_cast<std::size_t>(i)], where);
  return v;
}

Rgb color(const json& j, const std::string& where) {
  const Vec3 c = vec<3>(j, where);
  for (int i = 0; i < 3; ++i) {
    if (!(c[i] >= 0.0 && c[i] <= 1.0)) throw ValidationError(where + ": color outside [0, 1]");
  }
  return {static_cast<float>(c[0]), static_cast<float>(c[1]), static_cast<float>(c[2])};
}

json array_of(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json json_parse(const std::string& text, const fs::path& path) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": invalid JSON: " + e.what(),
                      static_cast<long long>(e.byte));
  }
}

Texture texture_from_json(const json& j, const fs::path& base_dir, const std::string& where) {
  Texture t;
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "checkerboard") return t;
    if (s == "sinusoid") {
      t.kind = Texture::Kind::kSinusoid;
      return t;
    }
    if (fs::path(s).extension() == ".png") return texture_from_json({{"type", "image"}, {"path", s}}, base_dir, where);
    throw ValidationError(where + ": unknown texture '" + s + "'");
  }
  reject_unknown_keys(j, {"type", "cell_size", "color_a", "color_b", "color", "path", "pixel_size"},
                      where);
  const json& type = require(j, "type", where);
  if (!type.is_string()) throw ValidationError(where + ": texture type must be a string");
  const std::string kind = type.get<std::string>();
  if (kind == "checkerboard") {
    t.kind = Texture::Kind::kCheckerboard;
  } else if (kind == "sinusoid") {
    t.kind = Texture::Kind::kSinusoid;
  } else if (kind == "solid") {
    t.kind = Texture::Kind::kSolid;
    if (j.contains("color")) t.color_a = color(j["color"], where + ".color");
  } else if (kind == "image") {
    t.kind = Texture::Kind::kImage;
    const json& p = require(j, "path", where);
    if (!p.is_string()) throw ValidationError(where + ".path: expected a string");
    fs::path file = p.get<std::string>();
    if (file.is_relative()) file = base_dir / file;
    t.image = load_png_rgb(file);
    if (j.contains("pixel_size")) t.pixel_size = number(j["pixel_size"], where + ".pixel_size");
  } else {
    throw ValidationError(where + ": unknown texture type '" + kind + "'");
  }
  if (j.contains("cell_size")) t.cell_size = number(j["cell_size"], where + ".cell_size");
  if (j.contains("color_a")) t.color_a = color(j["color_a"], where + ".color_a");
  if (j.contains("color_b")) t.color_b = color(j["color_b"], where + ".color_b");
  return t;
}

json pose_json(const Pose& p) {
  json r = json::array();
  for (int i = 0; i < 3; ++i) {
    for (int c = 0; c < 3; ++c) r.push_back(p.rotation(i, c));
  }
  return {{"rotation", r}, {"translation", array_of(p.translation)}};
}

json intrinsics_json(const CameraIntrinsics& k) {
  return {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx},
          {"cy", k.cy}, {"width", k.width}, {"height", k.height}};
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json to_json(const CameraView& view) {
  json j = intrinsics_json(view.k);
  const json p = pose_json(view.pose);
  j["rotation"] = p["rotation"];
  j["translation"] = p["translation"];
  return j;
}

CameraView camera_from_json(const json& j) {
  const std::string where = "camera";
  reject_unknown_keys(j, {"fx", "fy", "cx", "cy", "width", "height", "rotation", "translation"},
                      where);
  CameraView v;
  const long long w = integer(require(j, "width", where), where + ".width");
  const long long h = integer(require(j, "height", where), where + ".height");
  if (w <= 0 || h <= 0 || w > 1 << 16 || h > 1 << 16) {
    throw ValidationError(where + ": width and height must be in [1, 65536]");
  }
  v.k = CameraIntrinsics::make(number(require(j, "fx", where), where + ".fx"),
                               number(require(j, "fy", where), where + ".fy"),
                               number(require(j, "cx", where), where + ".cx"),
                               number(require(j, "cy", where), where + ".cy"),
                               static_cast<int>(w), static_cast<int>(h));
  Mat3 r = Mat3::Identity();
  if (j.contains("rotation")) {
    const json& rj = j["rotation"];
    if (rj.is_array() && rj.size() == 3 && rj[0].is_array()) {
      for (int i = 0; i < 3; ++i) r.row(i) = vec<3>(rj[static_cast<std::size_t>(i)], where + ".rotation").transpose();
    } else if (rj.is_array() && rj.size() == 9) {
      for (int i = 0; i < 9; ++i) r(i / 3, i % 3) = number(rj[static_cast<std::size_t>(i)], where + ".rotation");
    } else {
      throw ValidationError(where + ".rotation: expected 9 numbers or a 3x3 array");
    }
  }
  const Vec3 t = j.contains("translation") ? vec<3>(j["translation"], where + ".translation")
                                           : Vec3::Zero();
  v.pose = Pose::make(r, t);
  return v;
}

CameraView load_camera(const fs::path& path) {
  return camera_from_json(json_parse(read_file(path), path));
}

void save_camera(const fs::path& path, const CameraView& view) {
  write_file_atomic(path, to_json(view).dump(2) + "\n");
}

json to_json(const CalibParams& p) { return {{"c1", p.c1}, {"c2", p.c2}, {"c3", p.c3}}; }

CalibParams calib_params_from_json(const json& j) {
  reject_unknown_keys(j, {"c1", "c2", "c3"}, "calibration");
  CalibParams p;
  p.c1 = number(require(j, "c1", "calibration"), "calibration.c1");
  if (j.contains("c2")) p.c2 = number(j["c2"], "calibration.c2");
  if (j.contains("c3")) p.c3 = number(j["c3"], "calibration.c3");
  if (p.c1 == 0.0) throw ValidationError("calibration: c1 must be non-zero");
  return p;
}

json to_json(const FitReport& r) {
  return {{"params", to_json(r.params)},
          {"objective", r.objective},
          {"gradient_norm", r.gradient_norm},
          {"inlier_rmse", r.inlier_rmse},
          {"inlier_count", r.inlier_count},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"residual_p50", r.residual_percentiles[0]},
          {"residual_p90", r.residual_percentiles[1]},
          {"residual_p99", r.residual_percentiles[2]}};
}

json to_json(const LossBreakdown& b) {
  return {{"l1", b.l1},           {"ssim_term", b.ssim_term}, {"depth_l1", b.depth_l1},
          {"depth_missing", b.depth_missing}, {"l_ori", b.l_ori}, {"l_con", b.l_con},
          {"total", b.total}};
}

json to_json(const TranslationBounds& b, double certified_max_disp) {
  return {{"max_t_x", b.max_t_x},
          {"max_t_y", b.max_t_y},
          {"t_z", b.t_z},
          {"certified_max_disp", certified_max_disp}};
}

Scene scene_from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_array()) reject_unknown_keys(j, {"planes"}, "scene");
  const json& planes = j.is_array() ? j : require(j, "planes", "scene");
  if (!planes.is_array()) throw ValidationError("scene.planes: expected an array");
  Scene scene;
  for (std::size_t i = 0; i < planes.size(); ++i) {
    const std::string where = "scene.planes[" + std::to_string(i) + "]";
    const json& pj = planes[i];
    reject_unknown_keys(pj, {"point", "normal", "texture", "extent"}, where);
    Plane p;
    p.point = vec<3>(require(pj, "point", where), where + ".point");
    p.normal = vec<3>(require(pj, "normal", where), where + ".normal");
    if (pj.contains("texture")) p.texture = texture_from_json(pj["texture"], base_dir, where + ".texture");
    if (pj.contains("extent") && !pj["extent"].is_null()) {
      p.half_extent = vec<2>(pj["extent"], where + ".extent");
    }
    scene.planes.push_back(std::move(p));
  }
  scene.validate();
  return scene;
}

Scene load_scene(const fs::path& path) {
  return scene_from_json(json_parse(read_file(path), path), path.parent_path());
}

CascadeConfig cascade_config_from_json(const json& j) {
  const std::string where = "cascade";
  reject_unknown_keys(j,
                      {"schedule_divisor", "total_iterations", "warp_steps", "warmup_iterations",
                       "views_per_round", "budget", "lambda", "lambda1", "directions",
                       "anchor_mode", "warp", "harmonic", "input_views", "seed", "calibration"},
                      where);
  CascadeConfig c;
  if (j.contains("schedule_divisor")) {
    c = CascadeConfig::scaled_schedule(
        static_cast<int>(integer(j["schedule_divisor"], where + ".schedule_divisor")));
  }
  const auto int_field = [&](const char* key, int& dst) {
    if (j.contains(key)) dst = static_cast<int>(integer(j[key], where + "." + key));
  };
  int_field("total_iterations", c.total_iterations);
  int_field("warmup_iterations", c.warmup_iterations);
  int_field("views_per_round", c.views_per_round);
  if (j.contains("warp_steps")) {
    const json& ws = j["warp_steps"];
    if (!ws.is_array()) throw ValidationError(where + ".warp_steps: expected an array");
    c.warp_steps.clear();
    for (const json& t : ws) c.warp_steps.push_back(static_cast<int>(integer(t, where + ".warp_steps")));
  }
  if (j.contains("budget")) {
    const json& b = j["budget"];
    reject_unknown_keys(b, {"epsilon", "z_min", "fixed_t_z"}, where + ".budget");
    if (b.contains("epsilon")) c.budget.epsilon = number(b["epsilon"], where + ".budget.epsilon");
    if (b.contains("z_min")) c.budget.z_min = number(b["z_min"], where + ".budget.z_min");
    if (b.contains("fixed_t_z")) c.budget.fixed_t_z = number(b["fixed_t_z"], where + ".budget.fixed_t_z");
  }
  if (j.contains("lambda")) c.lambda = number(j["lambda"], where + ".lambda");
  if (j.contains("lambda1")) c.lambda1 = number(j["lambda1"], where + ".lambda1");
  if (j.contains("directions")) {
    const json& ds = j["directions"];
    if (!ds.is_array()) throw ValidationError(where + ".directions: expected an array");
    c.directions.clear();
    for (const json& d : ds) c.directions.push_back(vec<3>(d, where + ".directions"));
  }
  if (j.contains("anchor_mode")) {
    const json& m = j["anchor_mode"];
    const std::string s = m.is_string() ? m.get<std::string>() : "";
    if (s == "reanchor") {
      c.anchor_mode = AnchorMode::kReanchor;
    } else if (s == "continue") {
      c.anchor_mode = AnchorMode::kContinueChain;
    } else {
      throw ValidationError(where + ".anchor_mode: expected \"reanchor\" or \"continue\"");
    }
  }
  if (j.contains("warp")) {
    const json& w = j["warp"];
    reject_unknown_keys(w, {"depth_band", "weight_floor"}, where + ".warp");
    if (w.contains("depth_band")) c.warp.depth_band = number(w["depth_band"], where + ".warp.depth_band");
    if (w.contains("weight_floor")) c.warp.weight_floor = number(w["weight_floor"], where + ".warp.weight_floor");
  }
  if (j.contains("harmonic")) {
    const json& h = j["harmonic"];
    reject_unknown_keys(h, {"tolerance", "max_sweeps"}, where + ".harmonic");
    if (h.contains("tolerance")) c.harmonic.tolerance = number(h["tolerance"], where + ".harmonic.tolerance");
    if (h.contains("max_sweeps")) {
      c.harmonic.max_sweeps = static_cast<int>(integer(h["max_sweeps"], where + ".harmonic.max_sweeps"));
    }
  }
  if (j.contains("input_views")) {
    c.input_view_count = static_cast<int>(j["input_views"].size());
  }
  return c;
}

void RunConfig::validate() const {
  for (const fs::path& p : {scene_path, config_path}) {
    if (!fs::exists(p)) throw ValidationError("no such file: " + p.string());
  }
  if (output_dir.empty()) throw ValidationError("no output directory given");
  if (input_cameras.empty()) throw ValidationError("run config: no input views");
  cascade.validate();
  for (const CameraView& v : input_cameras) {
    v.k.validate();
    v.pose.validate();
  }
}

RunConfig load_run_config(const fs::path& scene_path, const fs::path& config_path,
                          const fs::path& output_dir) {
  RunConfig rc;
  rc.scene_path = scene_path;
  rc.config_path = config_path;
  rc.output_dir = output_dir;
  if (!fs::exists(config_path)) throw ValidationError("no such file: " + config_path.string());
  const json j = json_parse(read_file(config_path), config_path);
  rc.cascade = cascade_config_from_json(j);
  if (!j.contains("input_views") || !j["input_views"].is_array() || j["input_views"].empty()) {
    throw ValidationError(config_path.string() + ": 'input_views' must list at least one camera");
  }
  for (const json& v : j["input_views"]) rc.input_cameras.push_back(camera_from_json(v));
  rc.cascade.input_view_count = static_cast<int>(rc.input_cameras.size());
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) {
      throw ValidationError(config_path.string() + ": seed must be an integer");
    }
    rc.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("calibration")) rc.calib_override = calib_params_from_json(j["calibration"]);
  rc.validate();
  return rc;
}

namespace {

std::string view_file(int index, const char* suffix) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "view_%03d_%s", index, suffix);
  return buf;
}

std::size_t count_set(const Mask& m) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < m.size(); ++i) n += m[i] != 0;
  return n;
}

}  // namespace

std::string ledger_json_text(const CascadeResult& result, std::uint64_t seed) {
  json records = json::array();
  for (const PseudoViewRecord& r : result.records) {
    records.push_back({
        {"index", r.index},
        {"round", r.round},
        {"parent", {{"kind", r.parent.is_input ? "input" : "pseudo"}, {"index", r.parent.index}}},
        {"pose", pose_json(r.pose)},
        {"intrinsics", intrinsics_json(r.k)},
        {"offset", array_of(r.offset)},
        {"certified_max_disp", r.certified_max_disp},
        {"hole_fraction", r.hole_fraction},
        {"residual_pixels", count_set(r.residual_mask)},
        {"files",
         {{"image", view_file(r.index, "image.png")},
          {"depth", view_file(r.index, "depth.pfm")},
          {"residual", view_file(r.index, "residual.png")},
          {"holes", view_file(r.index, "holes.png")}}},
    });
  }
  const json ledger = {{"seed", seed},
                       {"renderer_state", result.renderer_state},
                       {"rounds_run", result.rounds_run},
                       {"diagnostics", result.diagnostics},
                       {"iterations", result.trace.size()},
                       {"records", records}};
  return ledger.dump(2) + "\n";
}

std::string loss_trace_csv(const std::vector<LossTraceRow>& trace) {
  std::string out = "iteration,l_ori,l_con,total,pseudo_active\n";
  for (const LossTraceRow& r : trace) {
    out += std::to_string(r.iteration) + "," + format_double(r.l_ori) + "," +
           format_double(r.l_con) + "," + format_double(r.total) + "," +
           (r.pseudo_active ? "1" : "0") + "\n";
  }
  return out;
}

std::string pairs_csv(const std::vector<Pair>& pairs) {
  std::string out = "i,j,lidar_depth,d_mono\n";
  for (const Pair& p : pairs) {
    out += std::to_string(p.row) + "," + std::to_string(p.col) + "," +
           format_double(p.lidar_depth) + "," + format_double(p.disparity) + "\n";
  }
  return out;
}

void write_ledger(const fs::path& dir, const CascadeResult& result, std::uint64_t seed) {
  fs::create_directories(dir);
  for (const PseudoViewRecord& r : result.records) {
    save_png_rgb(dir / view_file(r.index, "image.png"), r.image);
    save_depth_pfm(dir / view_file(r.index, "depth.pfm"), r.depth);
    save_png_mask(dir / view_file(r.index, "residual.png"), r.residual_mask);
    save_png_mask(dir / view_file(r.index, "holes.png"), r.warp_hole_mask);
  }
  write_file_atomic(dir / "loss_trace.csv", loss_trace_csv(result.trace));
  write_file_atomic(dir / "ledger.json", ledger_json_text(result, seed));
}

}  // namespace pseudoview
