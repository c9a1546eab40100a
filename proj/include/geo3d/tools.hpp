#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "geo3d/camera.hpp"
#include "geo3d/geometry.hpp"
#include "geo3d/raster.hpp"
#include "geo3d/scene.hpp"

namespace geo3d {

struct DepthSample {
  int u = 0;
  int v = 0;
  double z = 0.0;  // meters, full precision
};

struct DepthQuery {
  std::string category;
  Box2D bbox2d{0, 0, 0, 0};
};

struct SamplingConfig {
  int n_points = 5;
  double min_depth = 0.1;  // meters; shallower readings are discarded as noise
  std::uint64_t seed = 0;

  void validate() const;
};

class DepthProvider {
 public:
  virtual ~DepthProvider() = default;
  virtual const DepthRaster& depth_for(const SceneRecord& scene) = 0;
};

class MaskProvider {
 public:
  virtual ~MaskProvider() = default;
  virtual const MaskRaster& mask_for(const SceneRecord& scene,
                                     const DepthQuery& query) = 0;
};

// Serves the scene's stored depth raster.
class GtDepthProvider : public DepthProvider {
 public:
  const DepthRaster& depth_for(const SceneRecord& scene) override;
};

// Serves the stored instance mask whose projected GT box best overlaps the
// query box, preferring instances with a matching category; ties break on the
// lowest instance_id. A scene without instances yields an empty mask.
class GtMaskProvider : public MaskProvider {
 public:
  const MaskRaster& mask_for(const SceneRecord& scene,
                             const DepthQuery& query) override;
};

CameraIntrinsics camera_intrinsic_tool(const SceneRecord& scene);

// Per query: collect in-mask pixels inside bbox2d with depth >= min_depth,
// reduce to at most n_points by seeded uniform sampling without replacement,
// and return them sorted by (v, u). Queries are independent: each reseeds
// from cfg.seed, so permuting queries permutes results.
std::vector<std::vector<DepthSample>> depth_sampling_tool(
    const SceneRecord& scene, const std::vector<DepthQuery>& queries,
    const SamplingConfig& cfg, MaskProvider& masks, DepthProvider& depths);

// The two tools behind one dispatch surface, addressable by scene id, so
// local execution, remote execution, and ablations are interchangeable.
class ToolSuite {
 public:
  virtual ~ToolSuite() = default;
  virtual CameraIntrinsics camera_intrinsics(const std::string& scene_id) = 0;
  virtual std::vector<std::vector<DepthSample>> depth_sampling(
      const std::string& scene_id, const std::vector<DepthQuery>& queries,
      const SamplingConfig& cfg) = 0;
};

// Local suite over one in-memory scene; the scene_id must match.
class SingleSceneToolSuite : public ToolSuite {
 public:
  explicit SingleSceneToolSuite(const SceneRecord& scene) : scene_(&scene) {}

  CameraIntrinsics camera_intrinsics(const std::string& scene_id) override;
  std::vector<std::vector<DepthSample>> depth_sampling(
      const std::string& scene_id, const std::vector<DepthQuery>& queries,
      const SamplingConfig& cfg) override;

 private:
  const SceneRecord& resolve(const std::string& scene_id) const;
  const SceneRecord* scene_;
  GtDepthProvider depths_;
  GtMaskProvider masks_;
};

class LocalToolSuite : public ToolSuite {
 public:
  explicit LocalToolSuite(const SceneStore& store) : store_(&store) {}

  CameraIntrinsics camera_intrinsics(const std::string& scene_id) override;
  std::vector<std::vector<DepthSample>> depth_sampling(
      const std::string& scene_id, const std::vector<DepthQuery>& queries,
      const SamplingConfig& cfg) override;

 private:
  const SceneStore* store_;
  GtDepthProvider depths_;
  GtMaskProvider masks_;
};

// Ablation wrapper: camera_intrinsics always answers with the pinned values,
// depth sampling passes through.
class FrozenIntrinsicsToolSuite : public ToolSuite {
 public:
  FrozenIntrinsicsToolSuite(ToolSuite& inner, const CameraIntrinsics& pinned)
      : inner_(&inner), pinned_(pinned) {}

  CameraIntrinsics camera_intrinsics(const std::string&) override {
    return pinned_;
  }
  std::vector<std::vector<DepthSample>> depth_sampling(
      const std::string& scene_id, const std::vector<DepthQuery>& queries,
      const SamplingConfig& cfg) override {
    return inner_->depth_sampling(scene_id, queries, cfg);
  }

 private:
  ToolSuite* inner_;
  CameraIntrinsics pinned_;
};

}  // namespace geo3d
