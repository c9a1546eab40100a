#pragma once

#include <utility>

#include "geo3d/error.hpp"

namespace geo3d {

// Pinhole intrinsics: focal lengths and principal point, all in pixels.
// The principal point may land outside the image rectangle after rescaling.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;

  void validate() const;
};

struct ImageMeta {
  int width = 0;
  int height = 0;

  void validate() const;
};

// Camera-frame point in meters: +X right, +Y down, +Z forward.
struct Point3D {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

// Dimensionless multiplier applied to intrinsics and pixel space.
class RescaleFactor {
 public:
  explicit RescaleFactor(double s);
  double value() const { return s_; }

 private:
  double s_;
};

// Half-away-from-zero rounding; the single rounding convention used wherever
// a real pixel value becomes an integer.
double round_half_away(double v);

// Scales all four intrinsics by s and the image size by s (rounded).
// Metric depth and 3D geometry are untouched by construction.
std::pair<CameraIntrinsics, ImageMeta> rescale_intrinsics(
    const CameraIntrinsics& k, const ImageMeta& meta, RescaleFactor s);

// Per-mille image coordinates to absolute pixels:
//   u_abs = round(u_norm / 1000 * W), v_abs = round(v_norm / 1000 * H).
std::pair<int, int> normalized_to_absolute(double u_norm, double v_norm,
                                           const ImageMeta& meta);

// Pinhole back-projection of a pixel at metric depth z:
//   X = (u - cx) * z / fx, Y = (v - cy) * z / fy, Z = z.
Point3D back_project(double u, double v, double depth_m,
                     const CameraIntrinsics& k);

// Forward pinhole map; returns unrounded pixel coordinates.
std::pair<double, double> project_point(const Point3D& p,
                                        const CameraIntrinsics& k);

}  // namespace geo3d
