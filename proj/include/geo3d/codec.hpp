#pragma once

#include <json.hpp>

#include "geo3d/camera.hpp"
#include "geo3d/geometry.hpp"

namespace geo3d {

// All JSON emitted by this library uses insertion-ordered objects so that
// serialization is byte-stable.
using ojson = nlohmann::ordered_json;

ojson intrinsics_to_json(const CameraIntrinsics& k);
CameraIntrinsics intrinsics_from_json(const ojson& j);

ojson meta_to_json(const ImageMeta& m);
ImageMeta meta_from_json(const ojson& j);

ojson box2d_to_json(const Box2D& b);  // [u_min, v_min, u_max, v_max]
Box2D box2d_from_json(const ojson& j);

ojson box3d_to_json(const Box3D& b);  // [Xc, Yc, Zc, l, w, h, yaw, pitch, roll]
Box3D box3d_from_json(const ojson& j);

// Typed field access with parse errors naming the offending field.
const ojson& require_field(const ojson& j, const char* key,
                           const char* context);
double require_real(const ojson& j, const char* key, const char* context);
std::int64_t require_int(const ojson& j, const char* key, const char* context);
std::string require_string(const ojson& j, const char* key,
                           const char* context);

}  // namespace geo3d
