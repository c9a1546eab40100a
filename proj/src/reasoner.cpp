#include "geo3d/reasoner.hpp"

#include <algorithm>
#include <cmath>

#include "geo3d/error.hpp"

namespace geo3d {

const InstanceGT* select_gt_instance(const SceneRecord& scene,
                                     const std::string& category,
                                     const Box2D& bbox) {
  const InstanceGT* best = nullptr;
  double best_iou = -1.0;
  bool best_category = false;
  for (const auto& inst : scene.instances) {
    const bool category_match = inst.category == category;
    double iou = 0.0;
    try {
      iou = iou_2d(project_box_to_2d(inst.box3d, scene.intrinsics, scene.meta),
                   bbox);
    } catch (const Error&) {
      continue;  // instance not visible
    }
    const bool better =
        best == nullptr || (category_match && !best_category) ||
        (category_match == best_category &&
         (iou > best_iou ||
          (iou == best_iou && inst.instance_id < best->instance_id)));
    if (better) {
      best = &inst;
      best_iou = iou;
      best_category = category_match;
    }
  }
  return best;
}

DimensionEstimate GtOracleEstimator::estimate(const SceneRecord& scene,
                                              const AnchorTarget& target,
                                              const Point3D&) {
  const InstanceGT* inst =
      select_gt_instance(scene, target.category, target.bbox);
  if (inst == nullptr)
    fail(ErrorKind::referential,
         "no visible ground-truth instance matches target \"" + target.label +
             "\" in scene " + scene.scene_id);
  DimensionEstimate e;
  e.l = inst->box3d.length();
  e.w = inst->box3d.width();
  e.h = inst->box3d.height();
  e.yaw = inst->box3d.yaw();
  e.pitch = inst->box3d.pitch();
  e.roll = inst->box3d.roll();
  e.source = "gt_oracle";
  return e;
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

}  // namespace

CategoryPriors build_category_priors(
    const std::vector<const SceneRecord*>& corpus) {
  std::map<std::string, std::array<std::vector<double>, 3>> per_category;
  std::array<std::vector<double>, 3> all;
  for (const SceneRecord* scene : corpus) {
    for (const auto& inst : scene->instances) {
      const double dims[3] = {inst.box3d.length(), inst.box3d.width(),
                              inst.box3d.height()};
      auto& rows = per_category[inst.category];
      for (int i = 0; i < 3; ++i) {
        rows[static_cast<std::size_t>(i)].push_back(dims[i]);
        all[static_cast<std::size_t>(i)].push_back(dims[i]);
      }
    }
  }
  CategoryPriors out;
  for (auto& [category, rows] : per_category)
    out.rows[category] = {median(rows[0]), median(rows[1]), median(rows[2])};
  if (!all[0].empty())
    out.global = {median(all[0]), median(all[1]), median(all[2])};
  out.instance_count = all[0].size();
  return out;
}

DimensionEstimate estimate_dims_category_prior(const std::string& category,
                                               const CategoryPriors& priors) {
  if (priors.instance_count == 0)
    fail(ErrorKind::config, "category priors table is empty");
  DimensionEstimate e;
  e.source = "category_prior";
  auto it = priors.rows.find(category);
  const CategoryPrior& row =
      it != priors.rows.end() ? it->second : priors.global;
  e.unknown_category = it == priors.rows.end();
  e.l = row.l;
  e.w = row.w;
  e.h = row.h;
  return e;
}

DimensionEstimate CategoryPriorEstimator::estimate(const SceneRecord&,
                                                   const AnchorTarget& target,
                                                   const Point3D&) {
  return estimate_dims_category_prior(target.category, priors_);
}

PipelineResult run_pipeline(const SceneRecord& scene, const AnchorSet& anchors,
                            const SamplingConfig& cfg,
                            DimensionEstimator& estimator, ToolSuite& suite) {
  if (anchors.empty())
    fail(ErrorKind::domain, "anchor set must be non-empty");
  cfg.validate();

  PipelineResult out;
  out.records.reserve(anchors.size());

  // Step 1: resolve anchors to absolute pixel boxes.
  std::vector<AnchorTarget> resolved = anchors;
  for (std::size_t i = 0; i < resolved.size(); ++i) {
    AnchorTarget& t = resolved[i];
    try {
      if (t.normalized) {
        const auto& n = *t.normalized;
        const auto [u0, v0] = normalized_to_absolute(n[0], n[1], scene.meta);
        const auto [u1, v1] = normalized_to_absolute(n[2], n[3], scene.meta);
        t.bbox = Box2D{u0, v0, u1, v1};
      }
      t.bbox.validate();
    } catch (const Error& e) {
      fail(e.kind(), "target " + std::to_string(i) + ": " + e.what());
    }
  }

  // Step 2: camera intrinsics via the tool.
  out.intrinsics = suite.camera_intrinsics(scene.scene_id);
  out.intrinsics.validate();

  // Step 3: batched depth sampling.
  std::vector<DepthQuery> queries;
  queries.reserve(resolved.size());
  for (const auto& t : resolved) queries.push_back({t.category, t.bbox});
  const auto samples = suite.depth_sampling(scene.scene_id, queries, cfg);
  if (samples.size() != resolved.size())
    fail(ErrorKind::provider, "tool returned " +
                                  std::to_string(samples.size()) +
                                  " sample lists for " +
                                  std::to_string(resolved.size()) + " queries");

  // Steps 4-5 per target.
  for (std::size_t i = 0; i < resolved.size(); ++i) {
    const AnchorTarget& t = resolved[i];
    DeductionRecord rec;
    rec.label = t.label;
    rec.category = t.category;
    rec.normalized = anchors[i].normalized;
    rec.bbox = t.bbox;
    rec.u_c = (t.bbox.u_min + t.bbox.u_max) / 2.0;
    rec.v_c = (t.bbox.v_min + t.bbox.v_max) / 2.0;
    rec.samples = samples[i];
    if (rec.samples.empty()) {
      rec.no_depth = true;
      out.records.push_back(std::move(rec));
      continue;
    }
    double sum = 0.0;
    for (const auto& s : rec.samples) sum += s.z;
    rec.z_bar = sum / static_cast<double>(rec.samples.size());
    rec.center_hat = back_project(rec.u_c, rec.v_c, rec.z_bar, out.intrinsics);
    try {
      rec.dims = estimator.estimate(scene, t, rec.center_hat);
    } catch (const Error& e) {
      fail(e.kind(), "target " + std::to_string(i) + ": " + e.what());
    }
    out.boxes.emplace_back(
        t.label, Box3D(rec.center_hat, rec.dims.l, rec.dims.w, rec.dims.h,
                       rec.dims.yaw, rec.dims.pitch, rec.dims.roll));
    out.records.push_back(std::move(rec));
  }
  return out;
}

ojson deduction_to_json(const DeductionRecord& r) {
  ojson j;
  j["label"] = r.label;
  j["category"] = r.category;
  if (r.normalized) {
    const auto& n = *r.normalized;
    j["normalized"] = ojson::array({n[0], n[1], n[2], n[3]});
  } else {
    j["normalized"] = nullptr;
  }
  j["bbox_2d"] = box2d_to_json(r.bbox);
  j["u_c"] = r.u_c;
  j["v_c"] = r.v_c;
  ojson samples = ojson::array();
  for (const auto& s : r.samples)
    samples.push_back(ojson::array({s.u, s.v, s.z}));
  j["samples"] = std::move(samples);
  j["no_depth"] = r.no_depth;
  if (r.no_depth) {
    j["z_bar"] = nullptr;
    j["center"] = nullptr;
    j["dims"] = nullptr;
  } else {
    j["z_bar"] = r.z_bar;
    j["center"] =
        ojson::array({r.center_hat.x, r.center_hat.y, r.center_hat.z});
    j["dims"] = ojson{{"l", r.dims.l},
                      {"w", r.dims.w},
                      {"h", r.dims.h},
                      {"yaw", r.dims.yaw},
                      {"pitch", r.dims.pitch},
                      {"roll", r.dims.roll},
                      {"source", r.dims.source},
                      {"unknown_category", r.dims.unknown_category}};
  }
  return j;
}

std::string deductions_to_jsonl(const std::vector<DeductionRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += deduction_to_json(r).dump();
    out += "\n";
  }
  return out;
}

namespace {

std::array<double, 4> to_per_mille(const Box2D& b, const ImageMeta& meta) {
  const auto pm = [](int px, int size) {
    return round_half_away(static_cast<double>(px) * 1000.0 / size);
  };
  return {pm(b.u_min, meta.width), pm(b.v_min, meta.height),
          pm(b.u_max, meta.width), pm(b.v_max, meta.height)};
}

}  // namespace

AnchorSet gt_anchors(const SceneRecord& scene, const std::string& task) {
  AnchorSet out;
  const auto make_target = [&](const std::string& label,
                               const InstanceGT& inst) {
    const Box2D projected =
        project_box_to_2d(inst.box3d, scene.intrinsics, scene.meta);
    AnchorTarget t;
    t.label = label;
    t.category = inst.category;
    t.normalized = to_per_mille(projected, scene.meta);
    const auto& n = *t.normalized;
    const auto [u0, v0] = normalized_to_absolute(n[0], n[1], scene.meta);
    const auto [u1, v1] = normalized_to_absolute(n[2], n[3], scene.meta);
    t.bbox = Box2D{u0, v0, u1, v1};
    return t;
  };
  const auto add_visible = [&](const std::string& label,
                               const InstanceGT& inst) {
    try {
      out.push_back(make_target(label, inst));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::not_visible) throw;  // skip hidden targets
    }
  };
  if (task == "detect") {
    for (const auto& inst : scene.instances) add_visible(inst.category, inst);
  } else if (task == "ground") {
    for (const auto& expr : scene.expressions)
      add_visible(expr.text, scene.instance(expr.instance_id));
  } else {
    fail(ErrorKind::config, "task must be \"detect\" or \"ground\", got \"" +
                                task + "\"");
  }
  return out;
}

}  // namespace geo3d
