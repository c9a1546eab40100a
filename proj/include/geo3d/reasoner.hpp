#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "geo3d/codec.hpp"
#include "geo3d/scene.hpp"
#include "geo3d/tools.hpp"

namespace geo3d {

// One 2D anchor to lift into 3D. When normalized per-mille coordinates are
// present they are authoritative and bbox is derived from them.
struct AnchorTarget {
  std::string label;     // category, or the referring expression text
  std::string category;  // used for mask lookup
  Box2D bbox{0, 0, 0, 0};
  std::optional<std::array<double, 4>> normalized;  // per-mille box corners
};

using AnchorSet = std::vector<AnchorTarget>;

struct DimensionEstimate {
  double l = 1, w = 1, h = 1;
  double yaw = 0, pitch = 0, roll = 0;
  std::string source;  // "gt_oracle" | "category_prior"
  bool unknown_category = false;
};

class DimensionEstimator {
 public:
  virtual ~DimensionEstimator() = default;
  virtual DimensionEstimate estimate(const SceneRecord& scene,
                                     const AnchorTarget& target,
                                     const Point3D& center) = 0;
};

// Copies extents and angles from the ground-truth instance that best matches
// the anchor (category match first, then projected-box overlap, then lowest
// instance_id); the shared selection rule of GtMaskProvider.
class GtOracleEstimator : public DimensionEstimator {
 public:
  DimensionEstimate estimate(const SceneRecord& scene,
                             const AnchorTarget& target,
                             const Point3D& center) override;
};

struct CategoryPrior {
  double l = 1, w = 1, h = 1;
};

struct CategoryPriors {
  std::map<std::string, CategoryPrior> rows;
  CategoryPrior global;
  std::size_t instance_count = 0;
};

// Per-category medians of GT extents over a corpus; global row over all.
CategoryPriors build_category_priors(const std::vector<const SceneRecord*>& corpus);
DimensionEstimate estimate_dims_category_prior(const std::string& category,
                                               const CategoryPriors& priors);

class CategoryPriorEstimator : public DimensionEstimator {
 public:
  explicit CategoryPriorEstimator(CategoryPriors priors)
      : priors_(std::move(priors)) {}
  DimensionEstimate estimate(const SceneRecord& scene,
                             const AnchorTarget& target,
                             const Point3D& center) override;

 private:
  CategoryPriors priors_;
};

// Full audit of one target's deduction chain.
struct DeductionRecord {
  std::string label;
  std::string category;
  std::optional<std::array<double, 4>> normalized;
  Box2D bbox{0, 0, 0, 0};
  double u_c = 0, v_c = 0;
  std::vector<DepthSample> samples;
  bool no_depth = false;  // zero valid depth samples; target emitted no box
  double z_bar = 0;
  Point3D center_hat{0, 0, 0};
  DimensionEstimate dims;
};

struct PipelineResult {
  CameraIntrinsics intrinsics{1, 1, 0, 0};  // as answered by the tool suite
  std::vector<std::pair<std::string, Box3D>> boxes;  // label, box
  std::vector<DeductionRecord> records;              // one per target
};

// The deduction chain: anchor conversion, intrinsic retrieval, depth
// sampling, center back-projection, dimension estimation.
PipelineResult run_pipeline(const SceneRecord& scene, const AnchorSet& anchors,
                            const SamplingConfig& cfg,
                            DimensionEstimator& estimator, ToolSuite& suite);

// Matching rule shared by the GT mask provider and the GT oracle estimator.
const InstanceGT* select_gt_instance(const SceneRecord& scene,
                                     const std::string& category,
                                     const Box2D& bbox);

ojson deduction_to_json(const DeductionRecord& r);
std::string deductions_to_jsonl(const std::vector<DeductionRecord>& records);

// GT-projected anchors for every instance (detect) or expression (ground).
AnchorSet gt_anchors(const SceneRecord& scene, const std::string& task);

}  // namespace geo3d
