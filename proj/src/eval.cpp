#include "geo3d/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "geo3d/error.hpp"
#include "geo3d/reasoner.hpp"

namespace geo3d {

MatchResult match_boxes(const std::vector<LabeledBox>& preds,
                        const std::vector<LabeledBox>& gts, double threshold,
                        IoUMode mode) {
  if (!(threshold > 0.0 && threshold < 1.0))
    fail(ErrorKind::domain, "match threshold must lie in (0, 1), got " +
                                std::to_string(threshold));
  struct Candidate {
    double iou;
    std::size_t pred, gt;
  };
  std::vector<Candidate> candidates;
  for (std::size_t p = 0; p < preds.size(); ++p)
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (preds[p].category != gts[g].category) continue;
      const double iou = iou_3d(preds[p].box, gts[g].box, mode).iou;
      if (iou >= threshold) candidates.push_back({iou, p, g});
    }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) {
                     if (a.iou != b.iou) return a.iou > b.iou;
                     if (a.pred != b.pred) return a.pred < b.pred;
                     return a.gt < b.gt;
                   });
  MatchResult result;
  std::vector<char> pred_used(preds.size(), 0), gt_used(gts.size(), 0);
  for (const Candidate& c : candidates) {
    if (pred_used[c.pred] || gt_used[c.gt]) continue;
    pred_used[c.pred] = gt_used[c.gt] = 1;
    result.pairs.push_back({c.pred, c.gt, c.iou});
  }
  for (std::size_t p = 0; p < preds.size(); ++p)
    if (!pred_used[p]) result.unmatched_preds.push_back(p);
  for (std::size_t g = 0; g < gts.size(); ++g)
    if (!gt_used[g]) result.unmatched_gts.push_back(g);
  return result;
}

void ConfusionAccumulator::add(const std::vector<LabeledBox>& preds,
                               const std::vector<LabeledBox>& gts) {
  const MatchResult m = match_boxes(preds, gts, threshold_, mode_);
  for (const MatchPair& pair : m.pairs) ++counts_[gts[pair.gt].category].tp;
  for (std::size_t p : m.unmatched_preds) ++counts_[preds[p].category].fp;
  for (std::size_t g : m.unmatched_gts) ++counts_[gts[g].category].fn;
}

DetectionReport ConfusionAccumulator::report(
    const std::set<std::string>& category_set, const std::string& label) const {
  DetectionReport report;
  report.category_set_label = label;
  double f1_sum = 0;
  std::size_t scored = 0;
  for (const auto& [category, c] : counts_) {
    if (!category_set.empty() && !category_set.count(category)) continue;
    if (c.tp + c.fp + c.fn == 0) continue;
    CategoryScore s;
    s.category = category;
    s.tp = c.tp;
    s.fp = c.fp;
    s.fn = c.fn;
    s.precision = (c.tp + c.fp) ? double(c.tp) / double(c.tp + c.fp) : 0.0;
    s.recall = (c.tp + c.fn) ? double(c.tp) / double(c.tp + c.fn) : 0.0;
    s.f1 = (2 * c.tp + c.fp + c.fn)
               ? 2.0 * double(c.tp) / double(2 * c.tp + c.fp + c.fn)
               : 0.0;
    f1_sum += s.f1;
    ++scored;
    report.per_category.push_back(std::move(s));
  }
  report.avg_f1 = scored ? f1_sum / double(scored) : 0.0;
  return report;
}

DetectionReport detection_f1(const std::vector<LabeledBox>& preds,
                             const std::vector<LabeledBox>& gts,
                             double threshold,
                             const std::set<std::string>& category_set) {
  if (category_set.empty())
    fail(ErrorKind::config, "detection scoring needs a non-empty category set");
  ConfusionAccumulator acc(threshold);
  acc.add(preds, gts);
  return acc.report(category_set, std::to_string(category_set.size()));
}

double grounding_accuracy(const std::vector<std::optional<Box3D>>& preds,
                          const std::vector<Box3D>& gts, double threshold) {
  if (preds.size() != gts.size())
    fail(ErrorKind::dimension_mismatch,
         "grounding needs one prediction slot per query: " +
             std::to_string(preds.size()) + " predictions vs " +
             std::to_string(gts.size()) + " queries");
  if (gts.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < gts.size(); ++i)
    if (preds[i] && iou_3d(*preds[i], gts[i]).iou >= threshold) ++hits;
  return double(hits) / double(gts.size());
}

ojson DetectionReport::to_json() const {
  ojson j;
  j["avg_f1"] = avg_f1;
  j["category_set"] = category_set_label;
  j["per_category"] = ojson::array();
  for (const auto& s : per_category)
    j["per_category"].push_back(ojson{{"category", s.category},
                                      {"tp", s.tp},
                                      {"fp", s.fp},
                                      {"fn", s.fn},
                                      {"precision", s.precision},
                                      {"recall", s.recall},
                                      {"f1", s.f1}});
  return j;
}

ojson SweepReport::to_json() const {
  ojson j;
  j["task"] = task;
  j["label"] = label;
  j["entries"] = ojson::array();
  for (const auto& e : entries) {
    ojson je;
    je["factor"] = e.factor;
    je["metric"] = e.metric;
    je["scenes_evaluated"] = e.scenes_evaluated;
    je["errors"] = e.errors;
    j["entries"].push_back(std::move(je));
  }
  return j;
}

namespace {

struct ScoredScene {
  std::vector<LabeledBox> pred_boxes;                // detect
  std::vector<LabeledBox> gt_boxes;                  // detect
  std::vector<std::optional<Box3D>> grounding_preds;  // ground
  std::vector<Box3D> grounding_gts;                  // ground
};

ScoredScene score_one_scene(const SceneRecord& original, double factor,
                            const SweepOptions& options) {
  const SceneRecord scaled = rescale_scene(original, RescaleFactor{factor});
  const AnchorSet anchors = gt_anchors(scaled, options.task);

  SingleSceneToolSuite local(scaled);
  FrozenIntrinsicsToolSuite frozen(local, original.intrinsics);
  ToolSuite& suite =
      options.freeze_intrinsics ? static_cast<ToolSuite&>(frozen) : local;

  GtOracleEstimator estimator;
  PipelineResult result;
  if (!anchors.empty())
    result = run_pipeline(scaled, anchors, options.cfg, estimator, suite);

  ScoredScene scored;
  if (options.task == "detect") {
    for (const auto& [label, box] : result.boxes)
      scored.pred_boxes.push_back({label, box});
    for (const auto& inst : original.instances)
      scored.gt_boxes.push_back({inst.category, inst.box3d});
    return scored;
  }

  // Ground: one slot per expression; anchors cover the visible ones in
  // order, and records flag the targets that produced no box.
  std::size_t anchor_pos = 0, box_pos = 0;
  for (const auto& expr : original.expressions) {
    scored.grounding_gts.push_back(
        original.instance(expr.instance_id).box3d);
    bool visible = true;
    try {
      project_box_to_2d(scaled.instance(expr.instance_id).box3d,
                        scaled.intrinsics, scaled.meta);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::not_visible) throw;
      visible = false;
    }
    if (!visible) {
      scored.grounding_preds.push_back(std::nullopt);
      continue;
    }
    const DeductionRecord& record = result.records.at(anchor_pos++);
    if (record.no_depth) {
      scored.grounding_preds.push_back(std::nullopt);
      continue;
    }
    scored.grounding_preds.push_back(result.boxes.at(box_pos++).second);
  }
  return scored;
}

}  // namespace

SweepReport rescale_sweep(const std::vector<const SceneRecord*>& corpus,
                          const SweepOptions& options) {
  if (options.task != "detect" && options.task != "ground")
    fail(ErrorKind::config, "task must be \"detect\" or \"ground\", got \"" +
                                options.task + "\"");
  options.cfg.validate();

  std::set<std::string> categories;
  for (const SceneRecord* scene : corpus)
    for (const auto& inst : scene->instances) categories.insert(inst.category);

  SweepReport report;
  report.task = options.task;
  report.label = options.label;
  for (int i = 0; i <= 10; ++i) {
    const double factor = double(5 + i) / 10.0;
    SweepEntry entry;
    entry.factor = factor;
    ConfusionAccumulator acc(options.threshold);
    std::size_t hits = 0, total = 0;
    for (const SceneRecord* scene : corpus) {
      try {
        const ScoredScene scored = score_one_scene(*scene, factor, options);
        if (options.task == "detect") {
          acc.add(scored.pred_boxes, scored.gt_boxes);
        } else {
          total += scored.grounding_gts.size();
          for (std::size_t q = 0; q < scored.grounding_gts.size(); ++q)
            if (scored.grounding_preds[q] &&
                iou_3d(*scored.grounding_preds[q], scored.grounding_gts[q])
                        .iou >= options.threshold)
              ++hits;
        }
        ++entry.scenes_evaluated;
      } catch (const Error& e) {
        entry.errors.push_back(scene->scene_id + ": " + e.what());
      }
    }
    if (options.task == "detect")
      entry.metric = acc.report(categories).avg_f1;
    else
      entry.metric = total ? double(hits) / double(total) : 0.0;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

std::string sweep_table(const std::vector<SweepReport>& reports) {
  std::size_t label_width = 6;  // "method"
  for (const auto& r : reports)
    label_width = std::max(label_width, r.label.size());
  std::ostringstream out;
  out << std::string(label_width - 6, ' ') << "method";
  for (int i = 0; i <= 10; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%7.1f", double(5 + i) / 10.0);
    out << buf;
  }
  out << "\n";
  for (const auto& r : reports) {
    out << std::string(label_width - r.label.size(), ' ') << r.label;
    for (const auto& e : r.entries) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%7.2f", e.metric * 100.0);
      out << buf;
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace geo3d
