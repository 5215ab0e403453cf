#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "pseudoview/geometry.h"
#include "pseudoview/image.h"

namespace pseudoview {

namespace fs = std::filesystem;

// Writes to a sibling temporary file and renames it into place, so a failed
// run never leaves a partial file behind.
void write_file_atomic(const fs::path& path, const std::string& bytes);
std::string read_file(const fs::path& path);

// PFM, single channel ("Pf"). Rows are stored bottom to top; a negative scale
// marks little-endian data. Writing always produces little-endian.
Image<float> decode_pfm(const std::string& bytes);
std::string encode_pfm(const Image<float>& image);
Image<float> load_pfm(const fs::path& path);
void save_pfm(const fs::path& path, const Image<float>& image);

// Depth through PFM: finite positive values are valid, invalid pixels are
// written as 0.
DepthImage load_depth_pfm(const fs::path& path);
void save_depth_pfm(const fs::path& path, const DepthImage& depth);

// 8-bit RGB PNG. Channels are quantized with round(c * 255).
ColorImage load_png_rgb(const fs::path& path);
void save_png_rgb(const fs::path& path, const ColorImage& image);
std::string encode_png_rgb(const ColorImage& image);

// 8-bit gray PNG, 255 = set.
Mask load_png_mask(const fs::path& path);
void save_png_mask(const fs::path& path, const Mask& mask);
std::string encode_png_mask(const Mask& mask);

// 16-bit gray PNG in millimeters, 0 = invalid. Lossy: depths are rounded to
// whole millimeters and clipped at 65.535 m.
DepthImage load_png_depth_mm(const fs::path& path);
void save_png_depth_mm(const fs::path& path, const DepthImage& depth);

// .pfm or .png by extension.
DepthImage load_depth(const fs::path& path);
DisparityImage load_disparity(const fs::path& path);

struct PointCloud {
  std::vector<Vec3> points;
  std::size_t skipped_nonfinite = 0;
};

// ASCII "x y z" per line (blank lines and '#' comments ignored), or binary
// little-endian float32 triples when the extension is .bin. Rows with a
// non-finite coordinate are skipped and counted. Throws ValidationError when
// no finite point remains.
PointCloud load_pointcloud(const fs::path& path);
PointCloud parse_pointcloud_ascii(const std::string& text);
PointCloud parse_pointcloud_binary(const std::string& bytes);

// Sparse depth: each world point is moved into the camera frame and projected
// to its nearest pixel; points behind the camera or outside the frame are
// dropped; the nearest depth wins per pixel.
DepthImage project_pointcloud(const std::vector<Vec3>& world_points, const Pose& pose,
                              const CameraIntrinsics& k);

}  // namespace pseudoview
