#include "geo3d/scene.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "geo3d/codec.hpp"
#include "geo3d/error.hpp"

namespace fs = std::filesystem;

namespace geo3d {

void SceneRecord::validate() const {
  if (scene_id.empty())
    fail(ErrorKind::validation, "scene: scene_id must be non-empty");
  meta.validate();
  intrinsics.validate();
  if (depth.width != meta.width || depth.height != meta.height)
    fail(ErrorKind::dimension_mismatch,
         "scene " + scene_id + ": depth raster is " +
             std::to_string(depth.width) + "x" + std::to_string(depth.height) +
             ", image is " + std::to_string(meta.width) + "x" +
             std::to_string(meta.height));
  depth.validate();
  std::set<int> ids;
  for (const auto& inst : instances) {
    if (!ids.insert(inst.instance_id).second)
      fail(ErrorKind::validation, "scene " + scene_id +
                                      ": duplicate instance_id " +
                                      std::to_string(inst.instance_id));
    if (inst.category.empty())
      fail(ErrorKind::validation, "scene " + scene_id + ": instance " +
                                      std::to_string(inst.instance_id) +
                                      " has empty category");
    if (inst.mask.width != meta.width || inst.mask.height != meta.height)
      fail(ErrorKind::dimension_mismatch,
           "scene " + scene_id + ": mask of instance " +
               std::to_string(inst.instance_id) + " is " +
               std::to_string(inst.mask.width) + "x" +
               std::to_string(inst.mask.height) + ", image is " +
               std::to_string(meta.width) + "x" + std::to_string(meta.height));
    inst.mask.validate();
  }
  for (const auto& expr : expressions)
    if (ids.find(expr.instance_id) == ids.end())
      fail(ErrorKind::referential,
           "scene " + scene_id + ": expression \"" + expr.text +
               "\" references missing instance_id " +
               std::to_string(expr.instance_id));
}

const InstanceGT& SceneRecord::instance(int instance_id) const {
  for (const auto& inst : instances)
    if (inst.instance_id == instance_id) return inst;
  fail(ErrorKind::referential, "scene " + scene_id + ": no instance_id " +
                                   std::to_string(instance_id));
}

SceneRecord load_scene(const std::string& dir) {
  const fs::path root(dir);
  const fs::path json_path = root / "scene.json";
  std::ifstream in(json_path);
  if (!in) fail(ErrorKind::io, "cannot open " + json_path.string());
  ojson j;
  try {
    j = ojson::parse(in);
  } catch (const std::exception& e) {
    fail(ErrorKind::parse, json_path.string() + ": " + e.what());
  }

  SceneRecord r;
  r.scene_id = require_string(j, "scene_id", "scene.json");
  r.meta = meta_from_json(require_field(j, "meta", "scene.json"));
  r.intrinsics =
      intrinsics_from_json(require_field(j, "intrinsics", "scene.json"));
  r.depth_path = require_string(j, "depth", "scene.json");
  r.depth = load_depth_raster((root / r.depth_path).string());

  const ojson& instances = require_field(j, "instances", "scene.json");
  if (!instances.is_array())
    fail(ErrorKind::parse, "scene.json: \"instances\" must be an array");
  for (const auto& ji : instances) {
    InstanceGT inst;
    inst.instance_id =
        static_cast<int>(require_int(ji, "instance_id", "instance"));
    inst.category = require_string(ji, "category", "instance");
    inst.box3d = box3d_from_json(require_field(ji, "box3d", "instance"));
    inst.mask_path = require_string(ji, "mask", "instance");
    inst.mask = load_mask_raster((root / inst.mask_path).string());
    r.instances.push_back(std::move(inst));
  }

  if (j.contains("expressions")) {
    const ojson& exprs = j["expressions"];
    if (!exprs.is_array())
      fail(ErrorKind::parse, "scene.json: \"expressions\" must be an array");
    for (const auto& je : exprs)
      r.expressions.push_back(
          {static_cast<int>(require_int(je, "instance_id", "expression")),
           require_string(je, "text", "expression")});
  }

  r.validate();
  return r;
}

void save_scene(const SceneRecord& scene, const std::string& dir) {
  scene.validate();
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) fail(ErrorKind::io, "cannot create " + root.string());

  ojson j;
  j["scene_id"] = scene.scene_id;
  j["meta"] = meta_to_json(scene.meta);
  j["intrinsics"] = intrinsics_to_json(scene.intrinsics);
  j["depth"] = scene.depth_path;
  j["instances"] = ojson::array();
  for (const auto& inst : scene.instances) {
    ojson ji;
    ji["instance_id"] = inst.instance_id;
    ji["category"] = inst.category;
    ji["box3d"] = box3d_to_json(inst.box3d);
    ji["mask"] = inst.mask_path;
    j["instances"].push_back(std::move(ji));
  }
  j["expressions"] = ojson::array();
  for (const auto& expr : scene.expressions)
    j["expressions"].push_back(
        ojson{{"instance_id", expr.instance_id}, {"text", expr.text}});

  const fs::path json_path = root / "scene.json";
  std::ofstream out(json_path, std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot open for write: " + json_path.string());
  out << j.dump(2) << "\n";
  if (!out) fail(ErrorKind::io, "write failed: " + json_path.string());

  save_depth_raster((root / scene.depth_path).string(), scene.depth);
  for (const auto& inst : scene.instances)
    save_mask_raster((root / inst.mask_path).string(), inst.mask);
}

Box2D project_box_to_2d(const Box3D& b, const CameraIntrinsics& k,
                        const ImageMeta& meta) {
  meta.validate();
  double u_lo = 1e300, v_lo = 1e300, u_hi = -1e300, v_hi = -1e300;
  int visible = 0;
  for (const auto& c : b.corners()) {
    if (!(c.z > 0.0)) continue;
    auto [u, v] = project_point(c, k);
    u_lo = std::min(u_lo, u);
    v_lo = std::min(v_lo, v);
    u_hi = std::max(u_hi, u);
    v_hi = std::max(v_hi, v);
    ++visible;
  }
  if (visible == 0)
    fail(ErrorKind::not_visible, "all box corners are behind the camera");
  Box2D out{static_cast<int>(std::floor(u_lo)),
            static_cast<int>(std::floor(v_lo)),
            static_cast<int>(std::ceil(u_hi)),
            static_cast<int>(std::ceil(v_hi))};
  out.u_min = std::clamp(out.u_min, 0, meta.width);
  out.v_min = std::clamp(out.v_min, 0, meta.height);
  out.u_max = std::clamp(out.u_max, 0, meta.width);
  out.v_max = std::clamp(out.v_max, 0, meta.height);
  out.validate();
  return out;
}

SceneRecord rescale_scene(const SceneRecord& scene, const RescaleFactor& s) {
  scene.validate();
  auto [k2, m2] = rescale_intrinsics(scene.intrinsics, scene.meta, s);
  SceneRecord out;
  out.scene_id = scene.scene_id;
  out.meta = m2;
  out.intrinsics = k2;
  out.depth_path = scene.depth_path;
  out.depth = resample_nearest(scene.depth, m2.width, m2.height);
  out.instances = scene.instances;
  for (auto& inst : out.instances)
    inst.mask = resample_nearest(inst.mask, m2.width, m2.height);
  out.expressions = scene.expressions;
  out.validate();
  return out;
}

SceneStore::SceneStore(const std::string& root) {
  const fs::path r(root);
  if (!fs::exists(r)) fail(ErrorKind::io, "scene root not found: " + root);
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(r))
    if (entry.is_directory() && fs::exists(entry.path() / "scene.json"))
      dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());
  for (const auto& d : dirs) add(load_scene(d.string()));
  if (scenes_.empty())
    fail(ErrorKind::io, "no scene bundles under " + root);
}

void SceneStore::add(SceneRecord scene) {
  const std::string id = scene.scene_id;
  if (!scenes_.emplace(id, std::move(scene)).second)
    fail(ErrorKind::validation, "duplicate scene_id " + id);
}

const SceneRecord& SceneStore::get(const std::string& scene_id) const {
  auto it = scenes_.find(scene_id);
  if (it == scenes_.end())
    fail(ErrorKind::unknown_scene, "unknown scene_id " + scene_id);
  return it->second;
}

std::vector<std::string> SceneStore::ids() const {
  std::vector<std::string> out;
  out.reserve(scenes_.size());
  for (const auto& [id, scene] : scenes_) out.push_back(id);
  return out;
}

}  // namespace geo3d
