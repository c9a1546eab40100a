#pragma once

#include <string>
#include <vector>

#include "geo3d/geometry.hpp"
#include "geo3d/rng.hpp"
#include "geo3d/scene.hpp"

namespace geo3d::testsupport {

// Rotation matrix for intrinsic Z-Y-X Euler angles built through quaternion
// composition, as an independent cross-check of the direct matrix product.
Mat3 rotation_oracle(double yaw, double pitch, double roll);

// Box with center in [-4,4]^3, extents in [0.3, 2.5], angles in (-pi, pi].
Box3D random_box(Rng& rng);

// Box overlapping `base` with high probability: center jittered by at most
// `max_shift` per axis, extents re-drawn from the same range.
Box3D random_box_near(Rng& rng, const Box3D& base, double max_shift);

struct FixtureInstance {
  int id;
  std::string category;
  Box3D box;
};

// Scene whose depth is the float32 of each instance's center depth inside
// that instance's mask (the projected 2D box interior) and 0 elsewhere, so
// any subset of mask pixels averages to exactly the same value. Masks must
// not overlap; callers place instances in separate image regions.
SceneRecord make_constant_depth_scene(
    const std::string& scene_id, int width, int height,
    const CameraIntrinsics& k, const std::vector<FixtureInstance>& instances,
    const std::vector<std::pair<int, std::string>>& expressions = {});

// Four-instance scene (chair, table, sofa, lamp) in separate image
// quadrants, one referring expression per instance.
SceneRecord quadrant_scene(const std::string& scene_id, int width, int height);

}  // namespace geo3d::testsupport
