#include "pseudoview/io.h"

#include <png.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "pseudoview/error.h"

namespace pseudoview {

static_assert(std::endian::native == std::endian::little,
              "codecs assume a little-endian host");

void write_file_atomic(const fs::path& path, const std::string& bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw std::runtime_error("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw std::runtime_error("cannot move " + tmp.string() + " to " + path.string());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------- PFM

namespace {

struct HeaderReader {
  const std::string& bytes;
  std::size_t pos = 0;

  void skip_space() {
    while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  }
  // Next whitespace-delimited token and its offset.
  std::string token(std::size_t* at) {
    skip_space();
    *at = pos;
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(start, pos - start);
  }
};

template <typename T>
T parse_number(const std::string& tok, std::size_t at, const char* what) {
  T v{};
  const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (tok.empty() || r.ec != std::errc() || r.ptr != tok.data() + tok.size()) {
    throw FormatError(std::string("PFM: bad ") + what + " '" + tok + "'",
                      static_cast<long long>(at));
  }
  return v;
}

std::uint32_t byteswap32(std::uint32_t x) {
  return (x >> 24) | ((x >> 8) & 0xFF00u) | ((x << 8) & 0xFF0000u) | (x << 24);
}

}  // namespace

Image<float> decode_pfm(const std::string& bytes) {
  HeaderReader r{bytes};
  std::size_t at = 0;
  const std::string magic = r.token(&at);
  if (magic == "PF") throw FormatError("PFM: 3-channel 'PF' files are not supported", 0);
  if (magic != "Pf") throw FormatError("PFM: missing 'Pf' magic", 0);
  const std::string ws = r.token(&at);
  const long long w = parse_number<long long>(ws, at, "width");
  const std::string hs = r.token(&at);
  const long long h = parse_number<long long>(hs, at, "height");
  if (w <= 0 || h <= 0 || w > (1 << 20) || h > (1 << 20)) {
    throw FormatError("PFM: invalid dimensions " + ws + "x" + hs, static_cast<long long>(at));
  }
  const std::string ss = r.token(&at);
  const double scale = parse_number<double>(ss, at, "scale");
  if (scale == 0.0 || !std::isfinite(scale)) {
    throw FormatError("PFM: scale must be finite and non-zero", static_cast<long long>(at));
  }
  // Exactly one whitespace byte separates the header from the payload.
  if (r.pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[r.pos]))) {
    throw FormatError("PFM: header not terminated", static_cast<long long>(r.pos));
  }
  const std::size_t data_start = r.pos + 1;
  const std::size_t expected = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 4;
  const std::size_t actual = bytes.size() - data_start;
  if (actual < expected) {
    throw FormatError("PFM: truncated payload, expected " + std::to_string(expected) +
                          " bytes, found " + std::to_string(actual),
                      static_cast<long long>(bytes.size()));
  }
  const bool little = scale < 0.0;
  Image<float> img(static_cast<int>(w), static_cast<int>(h));
  const char* p = bytes.data() + data_start;
  for (long long row = 0; row < h; ++row) {
    const int y = static_cast<int>(h - 1 - row);
    for (int x = 0; x < w; ++x) {
      std::uint32_t bits;
      std::memcpy(&bits, p, 4);
      p += 4;
      if (!little) bits = byteswap32(bits);
      img.at(x, y) = std::bit_cast<float>(bits);
    }
  }
  return img;
}

std::string encode_pfm(const Image<float>& image) {
  std::string out = "Pf\n" + std::to_string(image.width()) + " " +
                    std::to_string(image.height()) + "\n-1.0\n";
  const std::size_t header = out.size();
  out.resize(header + image.size() * 4);
  char* p = out.data() + header;
  for (int y = image.height() - 1; y >= 0; --y) {
    for (int x = 0; x < image.width(); ++x) {
      std::memcpy(p, &image.at(x, y), 4);
      p += 4;
    }
  }
  return out;
}

Image<float> load_pfm(const fs::path& path) {
  try {
    return decode_pfm(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.byte_offset());
  }
}

void save_pfm(const fs::path& path, const Image<float>& image) {
  write_file_atomic(path, encode_pfm(image));
}

DepthImage load_depth_pfm(const fs::path& path) {
  return DepthImage::from_values(load_pfm(path));
}

void save_depth_pfm(const fs::path& path, const DepthImage& depth) {
  save_pfm(path, depth.values());
}

// ---------------------------------------------------------------- PNG

namespace {

struct PngRaw {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<unsigned char> bytes;  // rows, native-endian 16-bit samples
};

struct PngIo {
  const std::string* in = nullptr;
  std::size_t pos = 0;
  std::string* out = nullptr;
  char message[256] = {};
};

void png_fail(png_structp png, png_const_charp msg) {
  auto* io = static_cast<PngIo*>(png_get_error_ptr(png));
  std::snprintf(io->message, sizeof io->message, "%s", msg);
  png_longjmp(png, 1);
}

void png_warn(png_structp, png_const_charp) {}

void png_read_mem(png_structp png, png_bytep dst, png_size_t n) {
  auto* io = static_cast<PngIo*>(png_get_io_ptr(png));
  if (io->pos + n > io->in->size()) png_error(png, "truncated PNG data");
  std::memcpy(dst, io->in->data() + io->pos, n);
  io->pos += n;
}

void png_write_mem(png_structp png, png_bytep src, png_size_t n) {
  auto* io = static_cast<PngIo*>(png_get_io_ptr(png));
  io->out->append(reinterpret_cast<const char*>(src), n);
}

void png_flush_mem(png_structp) {}

// libpng reports errors by longjmp; only trivially destructible locals live
// in this frame.
bool png_decode_core(PngIo* io, PngRaw* raw) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, io, png_fail, png_warn);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, io, png_read_mem);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (depth == 16) png_set_swap(png);
  png_read_update_info(png, info);
  raw->width = static_cast<int>(png_get_image_width(png, info));
  raw->height = static_cast<int>(png_get_image_height(png, info));
  raw->channels = png_get_channels(png, info);
  raw->bit_depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  raw->bytes.resize(rowbytes * static_cast<std::size_t>(raw->height));
  for (int y = 0; y < raw->height; ++y) {
    png_read_row(png, raw->bytes.data() + rowbytes * static_cast<std::size_t>(y), nullptr);
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

PngRaw png_decode(const std::string& bytes, const std::string& name) {
  PngIo io;
  io.in = &bytes;
  PngRaw raw;
  if (bytes.size() < 8 || png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8)) {
    throw FormatError(name + ": not a PNG file", 0);
  }
  if (!png_decode_core(&io, &raw)) {
    throw FormatError(name + ": " + (io.message[0] ? io.message : "PNG decode failed"),
                      static_cast<long long>(io.pos));
  }
  return raw;
}

bool png_encode_core(PngIo* io, int width, int height, int channels, int bit_depth,
                     const unsigned char* rows) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, io, png_fail, png_warn);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, io, png_write_mem, png_flush_mem);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16) png_set_swap(png);
  const std::size_t rowbytes =
      static_cast<std::size_t>(width) * static_cast<std::size_t>(channels) * (bit_depth / 8);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, rows + rowbytes * static_cast<std::size_t>(y));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

std::string png_encode(int width, int height, int channels, int bit_depth,
                       const std::vector<unsigned char>& rows) {
  if (width <= 0 || height <= 0) throw ValidationError("PNG: cannot encode an empty image");
  std::string out;
  PngIo io;
  io.out = &out;
  if (!png_encode_core(&io, width, height, channels, bit_depth, rows.data())) {
    throw std::runtime_error(std::string("PNG encode failed: ") + io.message);
  }
  return out;
}

std::uint16_t sample16(const PngRaw& raw, std::size_t i) {
  std::uint16_t v;
  std::memcpy(&v, raw.bytes.data() + 2 * i, 2);
  return v;
}

unsigned char quantize8(float c) {
  const double v = std::clamp(static_cast<double>(c), 0.0, 1.0);
  return static_cast<unsigned char>(std::lround(v * 255.0));
}

}  // namespace

ColorImage load_png_rgb(const fs::path& path) {
  const PngRaw raw = png_decode(read_file(path), path.string());
  if (raw.bit_depth != 8) {
    throw FormatError(path.string() + ": expected an 8-bit PNG, found " +
                          std::to_string(raw.bit_depth) + "-bit",
                      0);
  }
  ColorImage img(raw.width, raw.height);
  for (std::size_t i = 0; i < img.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      const int src = raw.channels >= 3 ? c : 0;
      img[i][c] = static_cast<float>(raw.bytes[i * raw.channels + src]) / 255.0f;
    }
  }
  return img;
}

std::string encode_png_rgb(const ColorImage& image) {
  std::vector<unsigned char> rows(image.size() * 3);
  for (std::size_t i = 0; i < image.size(); ++i) {
    for (int c = 0; c < 3; ++c) rows[i * 3 + c] = quantize8(image[i][c]);
  }
  return png_encode(image.width(), image.height(), 3, 8, rows);
}

void save_png_rgb(const fs::path& path, const ColorImage& image) {
  write_file_atomic(path, encode_png_rgb(image));
}

Mask load_png_mask(const fs::path& path) {
  const PngRaw raw = png_decode(read_file(path), path.string());
  Mask m(raw.width, raw.height, 0);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const std::size_t s = i * raw.channels;
    m[i] = raw.bit_depth == 16 ? sample16(raw, s) != 0 : raw.bytes[s] != 0;
  }
  return m;
}

std::string encode_png_mask(const Mask& mask) {
  std::vector<unsigned char> rows(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) rows[i] = mask[i] ? 255 : 0;
  return png_encode(mask.width(), mask.height(), 1, 8, rows);
}

void save_png_mask(const fs::path& path, const Mask& mask) {
  write_file_atomic(path, encode_png_mask(mask));
}

DepthImage load_png_depth_mm(const fs::path& path) {
  const PngRaw raw = png_decode(read_file(path), path.string());
  if (raw.bit_depth != 16 || raw.channels != 1) {
    throw FormatError(path.string() + ": depth PNG must be 16-bit single channel", 0);
  }
  DepthImage d(raw.width, raw.height);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const std::uint16_t v = sample16(raw, i);
    if (v) d.set(i, static_cast<float>(v / 1000.0));
  }
  return d;
}

void save_png_depth_mm(const fs::path& path, const DepthImage& depth) {
  std::vector<unsigned char> rows(depth.size() * 2);
  for (std::size_t i = 0; i < depth.size(); ++i) {
    std::uint16_t v = 0;
    if (depth.valid(i)) {
      const double mm = std::clamp(std::round(depth.value(i) * 1000.0), 1.0, 65535.0);
      v = static_cast<std::uint16_t>(mm);
    }
    std::memcpy(rows.data() + 2 * i, &v, 2);
  }
  write_file_atomic(path, png_encode(depth.width(), depth.height(), 1, 16, rows));
}

DepthImage load_depth(const fs::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".pfm") return load_depth_pfm(path);
  if (ext == ".png") return load_png_depth_mm(path);
  throw ValidationError(path.string() + ": depth must be .pfm or .png");
}

DisparityImage load_disparity(const fs::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".pfm") return DisparityImage::from_values(load_pfm(path));
  if (ext == ".png") {
    // 16-bit PNG disparity stores value * 256; 0 = invalid.
    const PngRaw raw = png_decode(read_file(path), path.string());
    if (raw.bit_depth != 16 || raw.channels != 1) {
      throw FormatError(path.string() + ": disparity PNG must be 16-bit single channel", 0);
    }
    DisparityImage d(raw.width, raw.height);
    for (std::size_t i = 0; i < d.size(); ++i) {
      const std::uint16_t v = sample16(raw, i);
      if (v) d.set(i, static_cast<float>(v / 256.0));
    }
    return d;
  }
  throw ValidationError(path.string() + ": disparity must be .pfm or .png");
}

// ---------------------------------------------------------------- point clouds

PointCloud parse_pointcloud_ascii(const std::string& text) {
  PointCloud pc;
  std::size_t line_start = 0;
  int line_no = 0;
  while (line_start < text.size()) {
    std::size_t line_end = text.find('\n', line_start);
    if (line_end == std::string::npos) line_end = text.size();
    ++line_no;
    std::string_view line(text.data() + line_start, line_end - line_start);
    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);

    double xyz[3];
    int n = 0;
    std::size_t p = 0;
    bool bad = false;
    while (true) {
      while (p < line.size() && std::isspace(static_cast<unsigned char>(line[p]))) ++p;
      if (p >= line.size()) break;
      std::size_t q = p;
      while (q < line.size() && !std::isspace(static_cast<unsigned char>(line[q]))) ++q;
      if (n == 3) {
        bad = true;
        break;
      }
      const auto r = std::from_chars(line.data() + p, line.data() + q, xyz[n]);
      if (r.ec != std::errc() || r.ptr != line.data() + q) {
        bad = true;
        break;
      }
      ++n;
      p = q;
    }
    if (bad || (n != 0 && n != 3)) {
      throw FormatError("point cloud line " + std::to_string(line_no) +
                            ": expected three numbers 'x y z'",
                        static_cast<long long>(line_start));
    }
    if (n == 3) {
      if (std::isfinite(xyz[0]) && std::isfinite(xyz[1]) && std::isfinite(xyz[2])) {
        pc.points.emplace_back(xyz[0], xyz[1], xyz[2]);
      } else {
        ++pc.skipped_nonfinite;
      }
    }
    line_start = line_end + 1;
  }
  return pc;
}

PointCloud parse_pointcloud_binary(const std::string& bytes) {
  if (bytes.size() % 12 != 0) {
    throw FormatError("binary point cloud: size " + std::to_string(bytes.size()) +
                          " is not a multiple of 12 bytes",
                      static_cast<long long>(bytes.size() - bytes.size() % 12));
  }
  PointCloud pc;
  const std::size_t n = bytes.size() / 12;
  pc.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    float v[3];
    std::memcpy(v, bytes.data() + 12 * i, 12);
    if (std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2])) {
      pc.points.emplace_back(v[0], v[1], v[2]);
    } else {
      ++pc.skipped_nonfinite;
    }
  }
  return pc;
}

PointCloud load_pointcloud(const fs::path& path) {
  const std::string bytes = read_file(path);
  PointCloud pc;
  try {
    pc = path.extension() == ".bin" ? parse_pointcloud_binary(bytes)
                                    : parse_pointcloud_ascii(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.byte_offset());
  }
  if (pc.points.empty()) {
    throw ValidationError(path.string() + ": no finite points (" +
                          std::to_string(pc.skipped_nonfinite) + " non-finite rows skipped)");
  }
  return pc;
}

DepthImage project_pointcloud(const std::vector<Vec3>& world_points, const Pose& pose,
                              const CameraIntrinsics& k) {
  k.validate();
  std::vector<double> zbuf(static_cast<std::size_t>(k.width) * k.height,
                           std::numeric_limits<double>::infinity());
  for (const Vec3& w : world_points) {
    const Vec3 q = pose.apply(w);
    if (!(q.z() > 0.0)) continue;
    const double u = k.fx * q.x() / q.z() + k.cx;
    const double v = k.fy * q.y() / q.z() + k.cy;
    const double px = std::floor(u + 0.5);
    const double py = std::floor(v + 0.5);
    if (!(px >= 0.0 && py >= 0.0 && px < k.width && py < k.height)) continue;
    const std::size_t i = static_cast<std::size_t>(py) * k.width + static_cast<std::size_t>(px);
    if (q.z() < zbuf[i]) zbuf[i] = q.z();
  }
  DepthImage d(k.width, k.height);
  for (std::size_t i = 0; i < zbuf.size(); ++i) {
    if (std::isfinite(zbuf[i])) d.set(i, static_cast<float>(zbuf[i]));
  }
  return d;
}

}  // namespace pseudoview
