#include "support.hpp"

#include <cmath>
#include <stdexcept>

namespace geo3d::testsupport {

namespace {

struct Quat {
  double w, x, y, z;
};

Quat axis_angle(double ux, double uy, double uz, double angle) {
  const double h = angle / 2.0;
  const double s = std::sin(h);
  return {std::cos(h), ux * s, uy * s, uz * s};
}

Quat mul(const Quat& a, const Quat& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

Mat3 to_matrix(const Quat& q) {
  const double w = q.w, x = q.x, y = q.y, z = q.z;
  return Mat3{{{1 - 2 * (y * y + z * z), 2 * (x * y - w * z),
                2 * (x * z + w * y)},
               {2 * (x * y + w * z), 1 - 2 * (x * x + z * z),
                2 * (y * z - w * x)},
               {2 * (x * z - w * y), 2 * (y * z + w * x),
                1 - 2 * (x * x + y * y)}}};
}

}  // namespace

Mat3 rotation_oracle(double yaw, double pitch, double roll) {
  const Quat q = mul(mul(axis_angle(0, 0, 1, yaw), axis_angle(0, 1, 0, pitch)),
                     axis_angle(1, 0, 0, roll));
  return to_matrix(q);
}

Box3D random_box(Rng& rng) {
  constexpr double pi = 3.141592653589793238462643383279502884;
  return Box3D({rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(-4, 4)},
               rng.uniform(0.3, 2.5), rng.uniform(0.3, 2.5),
               rng.uniform(0.3, 2.5), rng.uniform(-pi, pi),
               rng.uniform(-pi, pi), rng.uniform(-pi, pi));
}

Box3D random_box_near(Rng& rng, const Box3D& base, double max_shift) {
  constexpr double pi = 3.141592653589793238462643383279502884;
  const Point3D c = base.center();
  return Box3D({c.x + rng.uniform(-max_shift, max_shift),
                c.y + rng.uniform(-max_shift, max_shift),
                c.z + rng.uniform(-max_shift, max_shift)},
               rng.uniform(0.3, 2.5), rng.uniform(0.3, 2.5),
               rng.uniform(0.3, 2.5), rng.uniform(-pi, pi),
               rng.uniform(-pi, pi), rng.uniform(-pi, pi));
}

SceneRecord make_constant_depth_scene(
    const std::string& scene_id, int width, int height,
    const CameraIntrinsics& k, const std::vector<FixtureInstance>& instances,
    const std::vector<std::pair<int, std::string>>& expressions) {
  SceneRecord scene;
  scene.scene_id = scene_id;
  scene.meta = {width, height};
  scene.intrinsics = k;
  scene.depth_path = "depth.raw";
  scene.depth.width = width;
  scene.depth.height = height;
  scene.depth.values.assign(
      static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0.0f);
  for (const FixtureInstance& fi : instances) {
    InstanceGT inst;
    inst.instance_id = fi.id;
    inst.category = fi.category;
    inst.box3d = fi.box;
    inst.mask_path = "mask_" + std::to_string(fi.id) + ".raw";
    inst.mask.width = width;
    inst.mask.height = height;
    inst.mask.values.assign(scene.depth.values.size(), 0);
    const Box2D bbox = project_box_to_2d(fi.box, k, scene.meta);
    const float z = static_cast<float>(fi.box.center().z);
    for (int v = bbox.v_min; v < bbox.v_max; ++v)
      for (int u = bbox.u_min; u < bbox.u_max; ++u) {
        const std::size_t idx = static_cast<std::size_t>(v) *
                                    static_cast<std::size_t>(width) +
                                static_cast<std::size_t>(u);
        if (scene.depth.values[idx] != 0.0f && scene.depth.values[idx] != z)
          throw std::logic_error("fixture masks overlap in scene " + scene_id);
        inst.mask.values[idx] = 1;
        scene.depth.values[idx] = z;
      }
    scene.instances.push_back(std::move(inst));
  }
  for (const auto& [id, text] : expressions)
    scene.expressions.push_back({id, text});
  scene.validate();
  return scene;
}

SceneRecord quadrant_scene(const std::string& scene_id, int width,
                           int height) {
  const double f = 0.78 * width;
  const CameraIntrinsics k{f, f, width / 2.0, height / 2.0};
  // Each box center projects onto its quadrant center; extents stay small
  // enough that the projected footprints never cross the image midlines.
  const auto at = [&](double qx, double qy, double z) {
    return Point3D{qx * (width / 4.0) * z / f, qy * (height / 4.0) * z / f, z};
  };
  const std::vector<FixtureInstance> instances = {
      {1, "chair", Box3D(at(-1, -1, 3.2), 0.7, 0.6, 0.9, 0.4, 0.0, 0.0)},
      {2, "table", Box3D(at(1, -1, 3.4), 0.9, 0.7, 0.6, -0.7, 0.0, 0.0)},
      {3, "sofa", Box3D(at(-1, 1, 3.3), 1.0, 0.8, 0.7, 1.2, 0.0, 0.0)},
      {4, "lamp", Box3D(at(1, 1, 3.5), 0.6, 0.6, 1.0, 2.2, 0.0, 0.0)},
  };
  return make_constant_depth_scene(
      scene_id, width, height, k, instances,
      {{1, "the chair near the window"},
       {2, "the table on the right"},
       {3, "the sofa in the corner"},
       {4, "the tall lamp"}});
}

}  // namespace geo3d::testsupport
