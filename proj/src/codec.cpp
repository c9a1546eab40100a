#include "geo3d/codec.hpp"

#include <string>

#include "geo3d/error.hpp"

namespace geo3d {

const ojson& require_field(const ojson& j, const char* key,
                           const char* context) {
  if (!j.is_object())
    fail(ErrorKind::parse, std::string(context) + ": expected an object");
  auto it = j.find(key);
  if (it == j.end())
    fail(ErrorKind::parse,
         std::string(context) + ": missing field \"" + key + "\"");
  return *it;
}

double require_real(const ojson& j, const char* key, const char* context) {
  const ojson& f = require_field(j, key, context);
  if (!f.is_number())
    fail(ErrorKind::parse,
         std::string(context) + ": field \"" + key + "\" must be a number");
  return f.get<double>();
}

std::int64_t require_int(const ojson& j, const char* key,
                         const char* context) {
  const ojson& f = require_field(j, key, context);
  if (!f.is_number_integer())
    fail(ErrorKind::parse,
         std::string(context) + ": field \"" + key + "\" must be an integer");
  return f.get<std::int64_t>();
}

std::string require_string(const ojson& j, const char* key,
                           const char* context) {
  const ojson& f = require_field(j, key, context);
  if (!f.is_string())
    fail(ErrorKind::parse,
         std::string(context) + ": field \"" + key + "\" must be a string");
  return f.get<std::string>();
}

ojson intrinsics_to_json(const CameraIntrinsics& k) {
  return ojson{{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}};
}

CameraIntrinsics intrinsics_from_json(const ojson& j) {
  CameraIntrinsics k{require_real(j, "fx", "intrinsics"),
                     require_real(j, "fy", "intrinsics"),
                     require_real(j, "cx", "intrinsics"),
                     require_real(j, "cy", "intrinsics")};
  k.validate();
  return k;
}

ojson meta_to_json(const ImageMeta& m) {
  return ojson{{"width", m.width}, {"height", m.height}};
}

ImageMeta meta_from_json(const ojson& j) {
  ImageMeta m{static_cast<int>(require_int(j, "width", "meta")),
              static_cast<int>(require_int(j, "height", "meta"))};
  m.validate();
  return m;
}

ojson box2d_to_json(const Box2D& b) {
  return ojson::array({b.u_min, b.v_min, b.u_max, b.v_max});
}

Box2D box2d_from_json(const ojson& j) {
  if (!j.is_array() || j.size() != 4)
    fail(ErrorKind::parse, "2D box must be an array of 4 values");
  for (const auto& e : j)
    if (!e.is_number_integer())
      fail(ErrorKind::parse, "2D box entries must be integers");
  Box2D b{j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
  b.validate();
  return b;
}

ojson box3d_to_json(const Box3D& b) {
  const auto a = b.as_array();
  return ojson::array({a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], a[8]});
}

Box3D box3d_from_json(const ojson& j) {
  if (!j.is_array() || j.size() != 9)
    fail(ErrorKind::parse, "3D box must be an array of 9 values");
  std::array<double, 9> a{};
  for (std::size_t i = 0; i < 9; ++i) {
    if (!j[i].is_number())
      fail(ErrorKind::parse, "3D box entries must be numbers");
    a[i] = j[i].get<double>();
  }
  return Box3D::from_array(a);
}

}  // namespace geo3d
