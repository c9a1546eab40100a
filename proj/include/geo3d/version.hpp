#pragma once

namespace geo3d {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace geo3d
