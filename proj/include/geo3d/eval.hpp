#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "geo3d/codec.hpp"
#include "geo3d/geometry.hpp"
#include "geo3d/scene.hpp"
#include "geo3d/tools.hpp"

namespace geo3d {

struct LabeledBox {
  std::string category;
  Box3D box{{0, 0, 1}, 1, 1, 1, 0, 0, 0};
};

struct MatchPair {
  std::size_t pred = 0;
  std::size_t gt = 0;
  double iou = 0;
};

struct MatchResult {
  std::vector<MatchPair> pairs;
  std::vector<std::size_t> unmatched_preds;
  std::vector<std::size_t> unmatched_gts;
};

// Greedy one-to-one matching within each category: candidate (pred, gt)
// pairs sorted by IoU descending (ties by pred index, then gt index) are
// accepted while both endpoints are unused and iou >= threshold.
MatchResult match_boxes(const std::vector<LabeledBox>& preds,
                        const std::vector<LabeledBox>& gts, double threshold,
                        IoUMode mode = IoUMode::full);

struct CategoryScore {
  std::string category;
  long tp = 0, fp = 0, fn = 0;
  double precision = 0, recall = 0, f1 = 0;
};

struct DetectionReport {
  std::vector<CategoryScore> per_category;  // sorted by category name
  double avg_f1 = 0;  // unweighted mean over scored categories
  std::string category_set_label;

  ojson to_json() const;
};

// Accumulates per-category confusion counts across scenes; matching runs
// independently per scene, counts aggregate corpus-wide.
class ConfusionAccumulator {
 public:
  explicit ConfusionAccumulator(double threshold = 0.25,
                                IoUMode mode = IoUMode::full)
      : threshold_(threshold), mode_(mode) {}

  void add(const std::vector<LabeledBox>& preds,
           const std::vector<LabeledBox>& gts);

  // Scores every category in `category_set` that has ground truth or
  // predictions; empty set means every category seen.
  DetectionReport report(const std::set<std::string>& category_set,
                         const std::string& label = "") const;

 private:
  struct Counts {
    long tp = 0, fp = 0, fn = 0;
  };
  double threshold_;
  IoUMode mode_;
  std::map<std::string, Counts> counts_;
};

// Single-collection convenience wrapper around ConfusionAccumulator.
DetectionReport detection_f1(const std::vector<LabeledBox>& preds,
                             const std::vector<LabeledBox>& gts,
                             double threshold,
                             const std::set<std::string>& category_set);

// Fraction of queries whose prediction reaches the IoU threshold; a missing
// prediction counts as a miss. Sizes must agree.
double grounding_accuracy(const std::vector<std::optional<Box3D>>& preds,
                          const std::vector<Box3D>& gts,
                          double threshold = 0.25);

struct SweepEntry {
  double factor = 1;
  double metric = 0;
  std::size_t scenes_evaluated = 0;
  std::vector<std::string> errors;  // per-scene failures, sweep continues
};

struct SweepReport {
  std::string task;   // "detect" | "ground"
  std::string label;  // pipeline variant, e.g. "oracle"
  std::vector<SweepEntry> entries;  // exactly 11, factors 0.5..1.5

  ojson to_json() const;
};

struct SweepOptions {
  std::string task = "detect";
  SamplingConfig cfg;
  double threshold = 0.25;
  bool freeze_intrinsics = false;  // pin the unscaled intrinsics (ablation)
  std::string label = "oracle";
};

// Rescales every scene to each factor in {0.5, 0.6, ..., 1.5}, re-derives
// GT-projected anchors at that factor, runs the deduction pipeline with the
// gt_oracle dimension estimator, and scores against the unscaled 3D GT.
SweepReport rescale_sweep(const std::vector<const SceneRecord*>& corpus,
                          const SweepOptions& options);

// Aligned plain-text table: one row per report, 11 factor columns, metric
// rendered as a percentage with two decimals.
std::string sweep_table(const std::vector<SweepReport>& reports);

}  // namespace geo3d
