#pragma once

#include <map>
#include <string>
#include <vector>

#include "geo3d/camera.hpp"
#include "geo3d/geometry.hpp"
#include "geo3d/raster.hpp"

namespace geo3d {

struct InstanceGT {
  int instance_id = 0;
  std::string category;
  Box3D box3d{{0, 0, 1}, 1, 1, 1, 0, 0, 0};
  std::string mask_path;  // relative to the bundle directory
  MaskRaster mask;
};

struct Expression {
  int instance_id = 0;
  std::string text;
};

// One frame bundle, fully loaded. Immutable after load.
struct SceneRecord {
  std::string scene_id;
  ImageMeta meta{1, 1};
  CameraIntrinsics intrinsics{1, 1, 0, 0};
  std::string depth_path;  // relative to the bundle directory
  DepthRaster depth;
  std::vector<InstanceGT> instances;
  std::vector<Expression> expressions;

  void validate() const;
  const InstanceGT& instance(int instance_id) const;
};

// Bundle directory layout: scene.json plus the raster files it references.
SceneRecord load_scene(const std::string& dir);
void save_scene(const SceneRecord& scene, const std::string& dir);

// Axis-aligned pixel bound of the 8 projected corners, rounded outward and
// clamped to [0,W]x[0,H]. Corners behind the camera are skipped; a box with
// no corner in front is not visible.
Box2D project_box_to_2d(const Box3D& b, const CameraIntrinsics& k,
                        const ImageMeta& meta);

// Scales intrinsics and pixel space by s (camera semantics); depth values and
// GT 3D boxes are unchanged; rasters are resampled nearest-neighbour.
SceneRecord rescale_scene(const SceneRecord& scene, const RescaleFactor& s);

// Loads every subdirectory of root that contains a scene.json.
class SceneStore {
 public:
  SceneStore() = default;
  explicit SceneStore(const std::string& root);

  void add(SceneRecord scene);
  const SceneRecord& get(const std::string& scene_id) const;
  std::vector<std::string> ids() const;
  std::size_t size() const { return scenes_.size(); }

 private:
  std::map<std::string, SceneRecord> scenes_;
};

}  // namespace geo3d
