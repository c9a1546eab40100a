#include "geo3d/raster.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "geo3d/error.hpp"

namespace geo3d {

namespace {

constexpr char kMagic[4] = {'G', 'A', 'R', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open raster file: " + path);
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorKind::io, "read failed: " + path);
  return data;
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot open for write: " + path);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) fail(ErrorKind::io, "write failed: " + path);
}

struct Header {
  std::uint32_t width, height;
  RasterKind kind;
};

Header parse_header(const std::string& data, const std::string& path) {
  if (data.size() < 16)
    fail(ErrorKind::parse, "raster header truncated (" +
                               std::to_string(data.size()) + " bytes): " + path);
  if (std::memcmp(data.data(), kMagic, 4) != 0)
    fail(ErrorKind::parse, "bad raster magic in " + path);
  const auto* p = reinterpret_cast<const unsigned char*>(data.data());
  Header h{get_u32(p + 4), get_u32(p + 8),
           static_cast<RasterKind>(get_u32(p + 12))};
  if (h.width == 0 || h.height == 0)
    fail(ErrorKind::parse, "raster dimensions must be positive in " + path);
  return h;
}

std::string make_header(std::uint32_t width, std::uint32_t height,
                        RasterKind kind) {
  std::string out(kMagic, 4);
  put_u32(out, width);
  put_u32(out, height);
  put_u32(out, static_cast<std::uint32_t>(kind));
  return out;
}

int source_index(int i, int src_size, int dst_size) {
  const int s = static_cast<int>(
      std::floor((i + 0.5) * static_cast<double>(src_size) / dst_size));
  return s < src_size ? s : src_size - 1;
}

}  // namespace

void DepthRaster::validate() const {
  if (width < 1 || height < 1)
    fail(ErrorKind::validation, "depth raster: dimensions must be positive");
  const std::size_t expect =
      static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (values.size() != expect)
    fail(ErrorKind::dimension_mismatch,
         "depth raster: value count " + std::to_string(values.size()) +
             " != width*height " + std::to_string(expect));
  for (float v : values)
    if (!(v >= 0.0f) || !std::isfinite(v))
      fail(ErrorKind::validation,
           "depth raster: values must be finite and >= 0");
}

void MaskRaster::validate() const {
  if (width < 1 || height < 1)
    fail(ErrorKind::validation, "mask raster: dimensions must be positive");
  const std::size_t expect =
      static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (values.size() != expect)
    fail(ErrorKind::dimension_mismatch,
         "mask raster: value count " + std::to_string(values.size()) +
             " != width*height " + std::to_string(expect));
}

DepthRaster load_depth_raster(const std::string& path) {
  const std::string data = read_file(path);
  const Header h = parse_header(data, path);
  if (h.kind != RasterKind::depth_f32)
    fail(ErrorKind::parse, "expected depth raster (kind 0) in " + path);
  const std::size_t n =
      static_cast<std::size_t>(h.width) * static_cast<std::size_t>(h.height);
  if (data.size() != 16 + n * sizeof(float))
    fail(ErrorKind::dimension_mismatch,
         "depth raster payload is " + std::to_string(data.size() - 16) +
             " bytes, header promises " + std::to_string(n * sizeof(float)) +
             ": " + path);
  DepthRaster r;
  r.width = static_cast<int>(h.width);
  r.height = static_cast<int>(h.height);
  r.values.resize(n);
  std::memcpy(r.values.data(), data.data() + 16, n * sizeof(float));
  r.validate();
  return r;
}

MaskRaster load_mask_raster(const std::string& path) {
  const std::string data = read_file(path);
  const Header h = parse_header(data, path);
  if (h.kind != RasterKind::mask_u8)
    fail(ErrorKind::parse, "expected mask raster (kind 1) in " + path);
  const std::size_t n =
      static_cast<std::size_t>(h.width) * static_cast<std::size_t>(h.height);
  if (data.size() != 16 + n)
    fail(ErrorKind::dimension_mismatch,
         "mask raster payload is " + std::to_string(data.size() - 16) +
             " bytes, header promises " + std::to_string(n) + ": " + path);
  MaskRaster r;
  r.width = static_cast<int>(h.width);
  r.height = static_cast<int>(h.height);
  r.values.resize(n);
  std::memcpy(r.values.data(), data.data() + 16, n);
  r.validate();
  return r;
}

void save_depth_raster(const std::string& path, const DepthRaster& r) {
  r.validate();
  std::string out = make_header(static_cast<std::uint32_t>(r.width),
                                static_cast<std::uint32_t>(r.height),
                                RasterKind::depth_f32);
  const std::size_t bytes = r.values.size() * sizeof(float);
  out.resize(16 + bytes);
  std::memcpy(out.data() + 16, r.values.data(), bytes);
  write_file(path, out);
}

void save_mask_raster(const std::string& path, const MaskRaster& r) {
  r.validate();
  std::string out = make_header(static_cast<std::uint32_t>(r.width),
                                static_cast<std::uint32_t>(r.height),
                                RasterKind::mask_u8);
  out.resize(16 + r.values.size());
  std::memcpy(out.data() + 16, r.values.data(), r.values.size());
  write_file(path, out);
}

DepthRaster resample_nearest(const DepthRaster& src, int width, int height) {
  src.validate();
  if (width < 1 || height < 1)
    fail(ErrorKind::domain, "resample target dimensions must be positive");
  DepthRaster out;
  out.width = width;
  out.height = height;
  out.values.resize(static_cast<std::size_t>(width) *
                    static_cast<std::size_t>(height));
  for (int v = 0; v < height; ++v) {
    const int sv = source_index(v, src.height, height);
    for (int u = 0; u < width; ++u)
      out.values[static_cast<std::size_t>(v) * width + u] =
          src.at(source_index(u, src.width, width), sv);
  }
  return out;
}

MaskRaster resample_nearest(const MaskRaster& src, int width, int height) {
  src.validate();
  if (width < 1 || height < 1)
    fail(ErrorKind::domain, "resample target dimensions must be positive");
  MaskRaster out;
  out.width = width;
  out.height = height;
  out.values.resize(static_cast<std::size_t>(width) *
                    static_cast<std::size_t>(height));
  for (int v = 0; v < height; ++v) {
    const int sv = source_index(v, src.height, height);
    for (int u = 0; u < width; ++u)
      out.values[static_cast<std::size_t>(v) * width + u] =
          src.at(source_index(u, src.width, width), sv);
  }
  return out;
}

}  // namespace geo3d
