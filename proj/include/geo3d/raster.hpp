#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace geo3d {

// Binary raster container: 16-byte little-endian header (magic "GAR1",
// u32 width, u32 height, u32 element kind) followed by row-major payload.
enum class RasterKind : std::uint32_t { depth_f32 = 0, mask_u8 = 1 };

struct DepthRaster {
  int width = 0;
  int height = 0;
  std::vector<float> values;  // meters; 0 encodes invalid

  void validate() const;
  float at(int u, int v) const {
    return values[static_cast<std::size_t>(v) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(u)];
  }
};

struct MaskRaster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;  // nonzero = inside mask

  void validate() const;
  bool at(int u, int v) const {
    return values[static_cast<std::size_t>(v) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(u)] != 0;
  }
};

DepthRaster load_depth_raster(const std::string& path);
MaskRaster load_mask_raster(const std::string& path);
void save_depth_raster(const std::string& path, const DepthRaster& r);
void save_mask_raster(const std::string& path, const MaskRaster& r);

// Nearest-neighbour resampling; source pixel for output index i is
// min(src_size - 1, floor((i + 0.5) * src_size / dst_size)).
DepthRaster resample_nearest(const DepthRaster& src, int width, int height);
MaskRaster resample_nearest(const MaskRaster& src, int width, int height);

}  // namespace geo3d
