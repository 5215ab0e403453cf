#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>

#include "oracles.h"
#include "pseudoview/error.h"
#include "pseudoview/io.h"
#include "pseudoview/serialization.h"

namespace pseudoview {
namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("pseudoview_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                         "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string big_endian_floats(std::initializer_list<float> values) {
  std::string out;
  for (float v : values) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<char>((bits >> s) & 0xff));
  }
  return out;
}

TEST(Pfm, RoundTripIsBitExact) {
  SplitRng rng(81);
  Image<float> img(17, 9);
  for (auto& v : img.data()) v = static_cast<float>(rng.uniform(-1e3, 1e3));
  img.at(3, 2) = std::numeric_limits<float>::denorm_min();
  const Image<float> back = decode_pfm(encode_pfm(img));
  ASSERT_EQ(back.width(), 17);
  EXPECT_EQ(std::memcmp(back.data().data(), img.data().data(), img.size() * 4), 0);
}

TEST(Pfm, BigEndianHandcrafted) {
  // Rows are stored bottom to top.
  const std::string bytes = "Pf\n2 2\n1.0\n" + big_endian_floats({3.0f, 4.0f, 1.0f, 2.5f});
  const Image<float> img = decode_pfm(bytes);
  EXPECT_EQ(img.at(0, 0), 1.0f);
  EXPECT_EQ(img.at(1, 0), 2.5f);
  EXPECT_EQ(img.at(0, 1), 3.0f);
  EXPECT_EQ(img.at(1, 1), 4.0f);
}

TEST(Pfm, TruncatedNamesByteCounts) {
  const std::string bytes = "Pf\n2 2\n-1.0\n" + std::string(10, '\0');
  try {
    decode_pfm(bytes);
    FAIL() << "no error";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("expected 16 bytes, found 10"), std::string::npos) << e.what();
  }
}

TEST(Pfm, MalformedHeader) {
  EXPECT_THROW(decode_pfm("P6\n2 2\n-1.0\n"), FormatError);
  EXPECT_THROW(decode_pfm("Pf\n2 x\n-1.0\n"), FormatError);
  EXPECT_THROW(decode_pfm("PF\n1 1\n-1.0\n" + std::string(12, '\0')), FormatError);
}

TEST(DepthFiles, PfmAndPngRoundTrip) {
  TempDir dir;
  SplitRng rng(82);
  const DepthImage d = oracle::random_depth(20, 10, 1.0, 0.2, rng);
  save_depth_pfm(dir.path() / "d.pfm", d);
  EXPECT_EQ(load_depth(dir.path() / "d.pfm"), d);
  save_png_depth_mm(dir.path() / "d.png", d);
  const DepthImage mm = load_depth(dir.path() / "d.png");
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(mm.valid(i), d.valid(i));
    if (d.valid(i)) {
      EXPECT_NEAR(mm.value(i), d.value(i), 0.0005 + 1e-6);
    }
  }
}

TEST(Png, ColorAndMaskRoundTrip) {
  TempDir dir;
  ColorImage img(5, 4);
  for (std::size_t i = 0; i < img.size(); ++i) {
    img[i] = Rgb{static_cast<float>(i) / 255.0f, 1.0f - static_cast<float>(i) / 255.0f, 0.5f};
  }
  save_png_rgb(dir.path() / "c.png", img);
  const ColorImage back = load_png_rgb(dir.path() / "c.png");
  for (std::size_t i = 0; i < img.size(); ++i) {
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(back[i][c], img[i][c], 0.5 / 255.0 + 1e-7);
  }
  EXPECT_EQ(load_png_rgb(dir.path() / "c.png"), back);
  Mask m(5, 4, 0);
  m.at(1, 2) = 1;
  save_png_mask(dir.path() / "m.png", m);
  EXPECT_EQ(load_png_mask(dir.path() / "m.png"), m);
}

TEST(PointCloud, Ascii) {
  const PointCloud pc = parse_pointcloud_ascii("1 2 3\n4 5 6\n# note\n7 8 9\n");
  ASSERT_EQ(pc.points.size(), 3u);
  EXPECT_EQ(pc.points[2], Vec3(7, 8, 9));
}

TEST(PointCloud, NanRowSkipped) {
  const PointCloud pc = parse_pointcloud_ascii("1 2 3\nnan 0 1\n4 5 6\n");
  EXPECT_EQ(pc.points.size(), 2u);
  EXPECT_EQ(pc.skipped_nonfinite, 1u);
}

TEST(PointCloud, BinaryMatchesAscii) {
  const float xyz[] = {0.1f, -2.5f, 7.75f, 1e-3f, 4.0f, 12.125f};
  std::string bin(reinterpret_cast<const char*>(xyz), sizeof xyz);
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < bin.size(); i += 4) std::swap(bin[i], bin[i + 3]), std::swap(bin[i + 1], bin[i + 2]);
  }
  const PointCloud b = parse_pointcloud_binary(bin);
  const PointCloud a = parse_pointcloud_ascii("0.1 -2.5 7.75\n0.001 4 12.125\n");
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    for (int c = 0; c < 3; ++c) EXPECT_EQ(static_cast<float>(a.points[i][c]), static_cast<float>(b.points[i][c]));
  }
  EXPECT_THROW(parse_pointcloud_binary(std::string(13, '\0')), FormatError);
}

TEST(PointCloud, NoFinitePointsIsError) {
  TempDir dir;
  write_file_atomic(dir.path() / "bad.xyz", "nan nan nan\n");
  EXPECT_THROW(load_pointcloud(dir.path() / "bad.xyz"), ValidationError);
}

TEST(ProjectPointcloud, PrincipalRay) {
  const auto k = CameraIntrinsics::make(100, 100, 20, 15, 40, 30);
  const DepthImage d = project_pointcloud({Vec3(0, 0, 5)}, Pose::identity(), k);
  EXPECT_EQ(d.valid_count(), 1u);
  EXPECT_EQ(d.value(20, 15), 5.0f);
}

TEST(ProjectPointcloud, NearestWins) {
  const auto k = CameraIntrinsics::make(100, 100, 20, 15, 40, 30);
  const DepthImage d = project_pointcloud({Vec3(0, 0, 7), Vec3(0, 0, 3), Vec3(0, 0, -2)}, Pose::identity(), k);
  EXPECT_EQ(d.valid_count(), 1u);
  EXPECT_EQ(d.value(20, 15), 3.0f);
}

TEST(ProjectPointcloud, PlaneDepth) {
  // Points on the world plane z = 8 seen from a translated camera.
  const auto k = CameraIntrinsics::make(60, 60, 31.5, 23.5, 64, 48);
  const Pose pose = Pose::make(Mat3::Identity(), Vec3(0.2, 0.1, -1.0));
  std::vector<Vec3> pts;
  for (int i = -40; i <= 40; ++i) {
    for (int j = -30; j <= 30; ++j) pts.emplace_back(i * 0.1, j * 0.1, 8.0);
  }
  const DepthImage d = project_pointcloud(pts, pose, k);
  ASSERT_GT(d.valid_count(), 100u);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.valid(i)) {
      EXPECT_NEAR(d.value(i), 7.0, 1e-6);
    }
  }
}

TEST(Camera, JsonRoundTrip) {
  CameraView v;
  v.k = CameraIntrinsics::make(512.25, 511.0, 320.5, 240.125, 640, 480);
  v.pose = Pose::make(axis_angle(Vec3(1, 2, 3).normalized(), 0.7), Vec3(0.1, 1e-17, -3));
  const CameraView back = camera_from_json(to_json(v));
  EXPECT_EQ(back.k, v.k);
  EXPECT_EQ(back.pose, v.pose);
  EXPECT_EQ(json::parse(to_json(v).dump()), to_json(v));
}

TEST(Camera, RejectsUnknownKeys) {
  json j = to_json(CameraView{CameraIntrinsics::make(1, 1, 0, 0, 1, 1), Pose::identity()});
  j["focal"] = 3;
  EXPECT_THROW(camera_from_json(j), ValidationError);
}

TEST(WriteFileAtomic, LeavesNoTempFile) {
  TempDir dir;
  write_file_atomic(dir.path() / "a.txt", "hello");
  EXPECT_EQ(read_file(dir.path() / "a.txt"), "hello");
  EXPECT_FALSE(fs::exists(dir.path() / "a.txt.tmp"));
  EXPECT_THROW(read_file(dir.path() / "missing"), ValidationError);
}

TEST(Scene, TopLevelListAndStrings) {
  const Scene s = scene_from_json(json::parse(R"([
    {"point": [0, 0, 10], "normal": [0, 0, -1], "texture": "checkerboard"},
    {"point": [0, 0, 5], "normal": [0, 0, 1], "texture": "sinusoid", "extent": [1, 2]}
  ])"));
  ASSERT_EQ(s.planes.size(), 2u);
  EXPECT_EQ(s.planes[1].texture.kind, Texture::Kind::kSinusoid);
  EXPECT_TRUE(s.planes[1].half_extent.has_value());
}

}  // namespace
}  // namespace pseudoview
