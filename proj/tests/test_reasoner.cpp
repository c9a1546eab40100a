#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>

#include "geo3d/error.hpp"
#include "geo3d/reasoner.hpp"
#include "support.hpp"

using namespace geo3d;

namespace {

// One crate at (0.4, 0, 2) whose mask region carries constant depth 2.0.
SceneRecord crate_scene() {
  return testsupport::make_constant_depth_scene(
      "crate", 640, 480, {500, 500, 320, 240},
      {{7, "crate", Box3D({0.4, 0, 2}, 1, 1, 1, 0, 0, 0)}});
}

AnchorTarget crate_anchor() {
  AnchorTarget t;
  t.label = "crate";
  t.category = "crate";
  t.bbox = Box2D{370, 190, 470, 290};
  return t;
}

}  // namespace

TEST_CASE("pipeline substitutes tool outputs into the back-projection") {
  const SceneRecord scene = crate_scene();
  GtOracleEstimator estimator;
  SingleSceneToolSuite suite(scene);
  SamplingConfig cfg;

  const PipelineResult result =
      run_pipeline(scene, {crate_anchor()}, cfg, estimator, suite);
  REQUIRE(result.boxes.size() == 1);
  REQUIRE(result.records.size() == 1);
  const DeductionRecord& r = result.records[0];
  CHECK(r.u_c == 420.0);
  CHECK(r.v_c == 240.0);
  CHECK(r.z_bar == 2.0);
  CHECK(r.center_hat.x == 0.4);
  CHECK(r.center_hat.y == 0.0);
  CHECK(r.center_hat.z == 2.0);
  const std::array<double, 9> expected{0.4, 0, 2, 1, 1, 1, 0, 0, 0};
  CHECK(result.boxes[0].first == "crate");
  CHECK(result.boxes[0].second.as_array() == expected);
  CHECK(result.intrinsics.fx == 500.0);
}

TEST_CASE("pipeline output is invariant under camera rescaling") {
  const SceneRecord scene = crate_scene();
  GtOracleEstimator estimator;
  SamplingConfig cfg;

  SingleSceneToolSuite base_suite(scene);
  const PipelineResult base =
      run_pipeline(scene, {crate_anchor()}, cfg, estimator, base_suite);

  for (const double s : {0.5, 1.5, 2.0}) {
    const SceneRecord scaled = rescale_scene(scene, RescaleFactor{s});
    AnchorTarget anchor = crate_anchor();
    anchor.bbox.u_min = static_cast<int>(std::lround(370 * s));
    anchor.bbox.v_min = static_cast<int>(std::lround(190 * s));
    anchor.bbox.u_max = static_cast<int>(std::lround(470 * s));
    anchor.bbox.v_max = static_cast<int>(std::lround(290 * s));
    SingleSceneToolSuite suite(scaled);
    const PipelineResult moved =
        run_pipeline(scaled, {anchor}, cfg, estimator, suite);
    REQUIRE(moved.boxes.size() == 1);
    const auto want = base.boxes[0].second.as_array();
    const auto got = moved.boxes[0].second.as_array();
    for (std::size_t i = 0; i < 9; ++i)
      CHECK(std::abs(got[i] - want[i]) <= 1e-6);
  }
}

TEST_CASE("targets without valid depth are flagged and excluded") {
  SceneRecord scene = testsupport::quadrant_scene("q", 640, 480);
  GtOracleEstimator estimator;
  SingleSceneToolSuite suite(scene);

  AnchorTarget empty_region;
  empty_region.label = "chair";
  empty_region.category = "chair";
  empty_region.bbox = Box2D{310, 230, 330, 250};  // image center, no mask

  AnchorSet anchors = gt_anchors(scene, "detect");
  anchors.push_back(empty_region);
  const PipelineResult result =
      run_pipeline(scene, anchors, SamplingConfig{}, estimator, suite);
  REQUIRE(result.records.size() == 5);
  CHECK(result.boxes.size() == 4);
  CHECK(!result.records[3].no_depth);
  CHECK(result.records[4].no_depth);
  CHECK(result.records[4].samples.empty());
}

TEST_CASE("pipeline rejects bad inputs with target context") {
  const SceneRecord scene = crate_scene();
  GtOracleEstimator estimator;
  SingleSceneToolSuite suite(scene);

  SUBCASE("empty anchor set") {
    try {
      run_pipeline(scene, {}, SamplingConfig{}, estimator, suite);
      FAIL("expected domain error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::domain);
    }
  }

  SUBCASE("normalized coordinates out of range name the target") {
    AnchorTarget bad = crate_anchor();
    bad.normalized = {{1200.0, 100.0, 1300.0, 200.0}};
    try {
      run_pipeline(scene, {crate_anchor(), bad}, SamplingConfig{}, estimator,
                   suite);
      FAIL("expected domain error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::domain);
      CHECK(std::string(e.what()).find("target 1") != std::string::npos);
    }
  }

  SUBCASE("out-of-bounds anchor box propagates the tool error") {
    AnchorTarget bad = crate_anchor();
    bad.bbox = Box2D{0, 0, 9999, 480};
    CHECK_THROWS_AS(run_pipeline(scene, {bad}, SamplingConfig{}, estimator,
                                 suite),
                    Error);
  }
}

TEST_CASE("audit records agree with the emitted boxes bit for bit") {
  const SceneRecord scene = testsupport::quadrant_scene("q", 640, 480);
  GtOracleEstimator estimator;
  SingleSceneToolSuite suite(scene);
  const AnchorSet anchors = gt_anchors(scene, "detect");
  const PipelineResult result =
      run_pipeline(scene, anchors, SamplingConfig{}, estimator, suite);
  REQUIRE(result.boxes.size() == result.records.size());
  for (std::size_t i = 0; i < result.boxes.size(); ++i) {
    const DeductionRecord& r = result.records[i];
    const Point3D c = result.boxes[i].second.center();
    CHECK(c.x == r.center_hat.x);
    CHECK(c.y == r.center_hat.y);
    CHECK(c.z == r.center_hat.z);
    REQUIRE(!r.samples.empty());
    double sum = 0;
    for (const DepthSample& s : r.samples) sum += s.z;
    CHECK(r.z_bar == sum / static_cast<double>(r.samples.size()));
    const Point3D back =
        back_project(r.u_c, r.v_c, r.z_bar, result.intrinsics);
    CHECK(back.x == r.center_hat.x);
    CHECK(back.y == r.center_hat.y);
    CHECK(back.z == r.center_hat.z);
  }
}

TEST_CASE("mean depth ignores sample order") {
  const SceneRecord scene = testsupport::quadrant_scene("q", 640, 480);
  GtOracleEstimator estimator;
  SingleSceneToolSuite suite(scene);
  AnchorSet anchors = gt_anchors(scene, "detect");
  const PipelineResult forward =
      run_pipeline(scene, anchors, SamplingConfig{}, estimator, suite);

  std::reverse(anchors.begin(), anchors.end());
  const PipelineResult reversed =
      run_pipeline(scene, anchors, SamplingConfig{}, estimator, suite);
  REQUIRE(reversed.boxes.size() == forward.boxes.size());
  const std::size_t n = forward.boxes.size();
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(reversed.boxes[n - 1 - i].first == forward.boxes[i].first);
    CHECK(reversed.boxes[n - 1 - i].second.as_array() ==
          forward.boxes[i].second.as_array());
  }
}

TEST_CASE("oracle predictions overlap ground truth on the synthetic scene") {
  const SceneRecord scene = testsupport::quadrant_scene("q", 640, 480);
  GtOracleEstimator estimator;
  SingleSceneToolSuite suite(scene);
  const AnchorSet anchors = gt_anchors(scene, "detect");
  const PipelineResult result =
      run_pipeline(scene, anchors, SamplingConfig{}, estimator, suite);
  REQUIRE(result.boxes.size() == scene.instances.size());
  for (std::size_t i = 0; i < result.boxes.size(); ++i) {
    const double iou =
        iou_3d(result.boxes[i].second, scene.instances[i].box3d).iou;
    CHECK(iou >= 0.25);
  }
}

TEST_CASE("category prior estimator serves medians") {
  // Seven instances across three categories; scenes are bare containers.
  const auto bare = [](const std::string& id,
                       std::vector<InstanceGT> instances) {
    SceneRecord s;
    s.scene_id = id;
    s.instances = std::move(instances);
    return s;
  };
  const auto inst = [](int id, const std::string& cat, double l, double w,
                       double h) {
    InstanceGT g;
    g.instance_id = id;
    g.category = cat;
    g.box3d = Box3D({0, 0, 2}, l, w, h, 0, 0, 0);
    return g;
  };
  const SceneRecord a = bare("a", {inst(1, "chair", 0.5, 0.5, 1.0),
                                   inst(2, "chair", 0.7, 0.6, 0.8),
                                   inst(3, "table", 1.2, 0.8, 0.7)});
  const SceneRecord b = bare("b", {inst(1, "chair", 0.6, 0.55, 0.9),
                                   inst(2, "table", 1.4, 0.9, 0.75),
                                   inst(3, "lamp", 0.3, 0.3, 1.5),
                                   inst(4, "lamp", 0.5, 0.4, 1.7)});
  const CategoryPriors priors = build_category_priors({&a, &b});
  CHECK(priors.instance_count == 7);

  SUBCASE("odd-count category takes the middle value per component") {
    const auto row = priors.rows.at("chair");
    CHECK(row.l == 0.6);
    CHECK(row.w == 0.55);
    CHECK(row.h == 0.9);
  }

  SUBCASE("even-count category averages the middle pair") {
    const auto table = priors.rows.at("table");
    CHECK(table.l == doctest::Approx(1.3).epsilon(1e-12));
    CHECK(table.w == doctest::Approx(0.85).epsilon(1e-12));
    CHECK(table.h == doctest::Approx(0.725).epsilon(1e-12));
    const auto lamp = priors.rows.at("lamp");
    CHECK(lamp.l == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(lamp.h == doctest::Approx(1.6).epsilon(1e-12));
  }

  SUBCASE("global row is the median over all seven instances") {
    // l values sorted: 0.3 0.5 0.5 0.6 0.7 1.2 1.4 -> middle 0.6
    CHECK(priors.global.l == 0.6);
  }

  SUBCASE("lookups return rows verbatim, unknowns fall back flagged") {
    const DimensionEstimate known = estimate_dims_category_prior("lamp",
                                                                 priors);
    CHECK(known.l == priors.rows.at("lamp").l);
    CHECK(known.source == "category_prior");
    CHECK(!known.unknown_category);
    CHECK(known.yaw == 0.0);

    const DimensionEstimate unknown =
        estimate_dims_category_prior("spaceship", priors);
    CHECK(unknown.unknown_category);
    CHECK(unknown.l == priors.global.l);
  }

  SUBCASE("empty priors are a configuration error") {
    try {
      estimate_dims_category_prior("chair", CategoryPriors{});
      FAIL("expected config error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::config);
    }
  }
}

TEST_CASE("gt anchors project instances and expressions") {
  SceneRecord scene = testsupport::quadrant_scene("q", 640, 480);

  SUBCASE("detect covers every visible instance in order") {
    const AnchorSet anchors = gt_anchors(scene, "detect");
    REQUIRE(anchors.size() == 4);
    CHECK(anchors[0].label == "chair");
    CHECK(anchors[3].label == "lamp");
    for (const AnchorTarget& t : anchors) {
      REQUIRE(t.normalized.has_value());
      const auto& n = *t.normalized;
      const auto [u0, v0] = normalized_to_absolute(n[0], n[1], scene.meta);
      const auto [u1, v1] = normalized_to_absolute(n[2], n[3], scene.meta);
      CHECK(t.bbox.u_min == u0);
      CHECK(t.bbox.v_min == v0);
      CHECK(t.bbox.u_max == u1);
      CHECK(t.bbox.v_max == v1);
    }
  }

  SUBCASE("ground uses expression text as the label") {
    const AnchorSet anchors = gt_anchors(scene, "ground");
    REQUIRE(anchors.size() == 4);
    CHECK(anchors[0].label == "the chair near the window");
    CHECK(anchors[0].category == "chair");
  }

  SUBCASE("instances behind the camera are skipped") {
    InstanceGT hidden;
    hidden.instance_id = 9;
    hidden.category = "ghost";
    hidden.box3d = Box3D({0, 0, -5}, 1, 1, 1, 0, 0, 0);
    hidden.mask_path = "mask_9.raw";
    hidden.mask.width = scene.meta.width;
    hidden.mask.height = scene.meta.height;
    hidden.mask.values.assign(scene.depth.values.size(), 0);
    scene.instances.push_back(hidden);
    scene.validate();
    const AnchorSet anchors = gt_anchors(scene, "detect");
    CHECK(anchors.size() == 4);
  }

  SUBCASE("unknown task is a configuration error") {
    try {
      gt_anchors(scene, "segment");
      FAIL("expected config error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::config);
    }
  }
}

TEST_CASE("deduction records serialize deterministically") {
  const SceneRecord scene = testsupport::quadrant_scene("q", 640, 480);
  GtOracleEstimator estimator;
  SingleSceneToolSuite suite(scene);
  const AnchorSet anchors = gt_anchors(scene, "detect");
  const PipelineResult result =
      run_pipeline(scene, anchors, SamplingConfig{}, estimator, suite);

  const std::string once = deductions_to_jsonl(result.records);
  const std::string twice = deductions_to_jsonl(result.records);
  CHECK(once == twice);
  CHECK(std::count(once.begin(), once.end(), '\n') == 4);

  const ojson j = deduction_to_json(result.records[0]);
  CHECK(j.contains("label"));
  CHECK(j.contains("bbox_2d"));
  CHECK(j.contains("u_c"));
  CHECK(j.contains("z_bar"));
  CHECK(j.contains("center"));
  CHECK(j.contains("dims"));
  CHECK(j["dims"]["source"] == "gt_oracle");
}
