#include "geo3d/tools.hpp"

#include <algorithm>

#include "geo3d/error.hpp"
#include "geo3d/reasoner.hpp"
#include "geo3d/rng.hpp"

namespace geo3d {

void SamplingConfig::validate() const {
  if (n_points < 1)
    fail(ErrorKind::validation,
         "sampling: n_points must be >= 1, got " + std::to_string(n_points));
  if (!(min_depth >= 0.0))
    fail(ErrorKind::validation, "sampling: min_depth must be >= 0, got " +
                                    std::to_string(min_depth));
}

const DepthRaster& GtDepthProvider::depth_for(const SceneRecord& scene) {
  return scene.depth;
}

const MaskRaster& GtMaskProvider::mask_for(const SceneRecord& scene,
                                           const DepthQuery& query) {
  const InstanceGT* best =
      select_gt_instance(scene, query.category, query.bbox2d);
  if (best == nullptr) {
    static thread_local MaskRaster empty;
    empty.width = scene.meta.width;
    empty.height = scene.meta.height;
    empty.values.assign(static_cast<std::size_t>(scene.meta.width) *
                            static_cast<std::size_t>(scene.meta.height),
                        0);
    return empty;
  }
  return best->mask;
}

CameraIntrinsics camera_intrinsic_tool(const SceneRecord& scene) {
  return scene.intrinsics;
}

std::vector<std::vector<DepthSample>> depth_sampling_tool(
    const SceneRecord& scene, const std::vector<DepthQuery>& queries,
    const SamplingConfig& cfg, MaskProvider& masks, DepthProvider& depths) {
  cfg.validate();
  std::vector<std::vector<DepthSample>> out;
  out.reserve(queries.size());
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    const DepthQuery& q = queries[qi];
    q.bbox2d.validate();
    if (q.bbox2d.u_min < 0 || q.bbox2d.v_min < 0 ||
        q.bbox2d.u_max > scene.meta.width ||
        q.bbox2d.v_max > scene.meta.height)
      fail(ErrorKind::domain,
           "query " + std::to_string(qi) + ": box outside the image");

    const MaskRaster* mask = nullptr;
    const DepthRaster* depth = nullptr;
    try {
      mask = &masks.mask_for(scene, q);
      depth = &depths.depth_for(scene);
    } catch (const Error& e) {
      fail(ErrorKind::provider,
           "query " + std::to_string(qi) + ": " + e.what());
    }
    if (mask->width != scene.meta.width || mask->height != scene.meta.height ||
        depth->width != scene.meta.width || depth->height != scene.meta.height)
      fail(ErrorKind::provider, "query " + std::to_string(qi) +
                                    ": provider raster does not match the "
                                    "scene dimensions");

    std::vector<DepthSample> candidates;
    for (int v = q.bbox2d.v_min; v < q.bbox2d.v_max; ++v)
      for (int u = q.bbox2d.u_min; u < q.bbox2d.u_max; ++u) {
        if (!mask->at(u, v)) continue;
        const double z = static_cast<double>(depth->at(u, v));
        if (z < cfg.min_depth) continue;
        candidates.push_back({u, v, z});
      }

    if (candidates.size() > static_cast<std::size_t>(cfg.n_points)) {
      Rng rng(cfg.seed);
      const auto picks = sample_without_replacement(
          rng, candidates.size(), static_cast<std::size_t>(cfg.n_points));
      std::vector<DepthSample> chosen;
      chosen.reserve(picks.size());
      for (std::size_t idx : picks) chosen.push_back(candidates[idx]);
      std::sort(chosen.begin(), chosen.end(),
                [](const DepthSample& a, const DepthSample& b) {
                  return a.v != b.v ? a.v < b.v : a.u < b.u;
                });
      out.push_back(std::move(chosen));
    } else {
      out.push_back(std::move(candidates));  // already in (v,u) scan order
    }
  }
  return out;
}

const SceneRecord& SingleSceneToolSuite::resolve(
    const std::string& scene_id) const {
  if (scene_id != scene_->scene_id)
    fail(ErrorKind::unknown_scene, "unknown scene_id " + scene_id);
  return *scene_;
}

CameraIntrinsics SingleSceneToolSuite::camera_intrinsics(
    const std::string& scene_id) {
  return camera_intrinsic_tool(resolve(scene_id));
}

std::vector<std::vector<DepthSample>> SingleSceneToolSuite::depth_sampling(
    const std::string& scene_id, const std::vector<DepthQuery>& queries,
    const SamplingConfig& cfg) {
  return depth_sampling_tool(resolve(scene_id), queries, cfg, masks_, depths_);
}

CameraIntrinsics LocalToolSuite::camera_intrinsics(
    const std::string& scene_id) {
  return camera_intrinsic_tool(store_->get(scene_id));
}

std::vector<std::vector<DepthSample>> LocalToolSuite::depth_sampling(
    const std::string& scene_id, const std::vector<DepthQuery>& queries,
    const SamplingConfig& cfg) {
  return depth_sampling_tool(store_->get(scene_id), queries, cfg, masks_,
                             depths_);
}

}  // namespace geo3d
