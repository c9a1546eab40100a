#include "geo3d/camera.hpp"

#include <cmath>
#include <string>

namespace geo3d {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !std::isfinite(fx))
    fail(ErrorKind::validation, "intrinsics: fx must be positive, got " + std::to_string(fx));
  if (!(fy > 0.0) || !std::isfinite(fy))
    fail(ErrorKind::validation, "intrinsics: fy must be positive, got " + std::to_string(fy));
  if (!std::isfinite(cx))
    fail(ErrorKind::validation, "intrinsics: cx must be finite");
  if (!std::isfinite(cy))
    fail(ErrorKind::validation, "intrinsics: cy must be finite");
}

void ImageMeta::validate() const {
  if (width < 1)
    fail(ErrorKind::validation, "meta: width must be >= 1, got " + std::to_string(width));
  if (height < 1)
    fail(ErrorKind::validation, "meta: height must be >= 1, got " + std::to_string(height));
}

RescaleFactor::RescaleFactor(double s) : s_(s) {
  if (!(s > 0.0) || !std::isfinite(s))
    fail(ErrorKind::domain, "rescale factor must be positive, got " + std::to_string(s));
}

double round_half_away(double v) {
  // std::round is specified as half-away-from-zero.
  return std::round(v);
}

std::pair<CameraIntrinsics, ImageMeta> rescale_intrinsics(
    const CameraIntrinsics& k, const ImageMeta& meta, RescaleFactor s) {
  k.validate();
  meta.validate();
  const double f = s.value();
  CameraIntrinsics out{k.fx * f, k.fy * f, k.cx * f, k.cy * f};
  ImageMeta out_meta{
      static_cast<int>(round_half_away(meta.width * f)),
      static_cast<int>(round_half_away(meta.height * f))};
  out_meta.validate();
  return {out, out_meta};
}

std::pair<int, int> normalized_to_absolute(double u_norm, double v_norm,
                                           const ImageMeta& meta) {
  meta.validate();
  if (!(u_norm >= 0.0 && u_norm <= 1000.0))
    fail(ErrorKind::domain,
         "normalized u out of [0, 1000]: " + std::to_string(u_norm));
  if (!(v_norm >= 0.0 && v_norm <= 1000.0))
    fail(ErrorKind::domain,
         "normalized v out of [0, 1000]: " + std::to_string(v_norm));
  const int u = static_cast<int>(round_half_away(u_norm * meta.width / 1000.0));
  const int v = static_cast<int>(round_half_away(v_norm * meta.height / 1000.0));
  return {u, v};
}

Point3D back_project(double u, double v, double depth_m,
                     const CameraIntrinsics& k) {
  k.validate();
  if (!(depth_m > 0.0) || !std::isfinite(depth_m))
    fail(ErrorKind::domain, "depth must be positive, got " + std::to_string(depth_m));
  return Point3D{(u - k.cx) * depth_m / k.fx, (v - k.cy) * depth_m / k.fy,
                 depth_m};
}

std::pair<double, double> project_point(const Point3D& p,
                                        const CameraIntrinsics& k) {
  k.validate();
  if (!(p.z > 0.0))
    fail(ErrorKind::not_visible, "point behind camera: z = " + std::to_string(p.z));
  return {k.fx * p.x / p.z + k.cx, k.fy * p.y / p.z + k.cy};
}

}  // namespace geo3d
