// Python bindings for the main operations: back-projection, exact IoU,
// pipeline runs over scene bundles, and trace build/verify. JSON-heavy
// results cross the boundary as dumped strings; the package wrapper decodes.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <string>
#include <vector>

#include "geo3d/eval.hpp"
#include "geo3d/reasoner.hpp"
#include "geo3d/scene.hpp"
#include "geo3d/tools.hpp"
#include "geo3d/trace.hpp"
#include "geo3d/version.hpp"

namespace py = pybind11;
using namespace geo3d;

namespace {

Box3D box_from_array(const std::array<double, 9>& v) {
  return Box3D({v[0], v[1], v[2]}, v[3], v[4], v[5], v[6], v[7], v[8]);
}

SamplingConfig sampling(std::uint64_t seed, int n_points, double min_depth) {
  SamplingConfig cfg;
  cfg.seed = seed;
  cfg.n_points = n_points;
  cfg.min_depth = min_depth;
  cfg.validate();
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_geo3d, m) {
  m.doc() = "auditable 2D-anchored 3D bounding box deduction";

  m.attr("__version__") = kVersion;

  m.def(
      "back_project",
      [](double u, double v, double z, double fx, double fy, double cx,
         double cy) {
        const Point3D p = back_project(u, v, z, CameraIntrinsics{fx, fy, cx, cy});
        return std::array<double, 3>{p.x, p.y, p.z};
      },
      py::arg("u"), py::arg("v"), py::arg("z"), py::arg("fx"), py::arg("fy"),
      py::arg("cx"), py::arg("cy"),
      "Pinhole back-projection of a pixel at metric depth.");

  m.def(
      "project_point",
      [](const std::array<double, 3>& p, double fx, double fy, double cx,
         double cy) {
        const auto [u, v] =
            project_point(Point3D{p[0], p[1], p[2]},
                          CameraIntrinsics{fx, fy, cx, cy});
        return std::array<double, 2>{u, v};
      },
      py::arg("point"), py::arg("fx"), py::arg("fy"), py::arg("cx"),
      py::arg("cy"), "Forward pinhole projection to unrounded pixels.");

  m.def(
      "iou",
      [](const std::array<double, 9>& a, const std::array<double, 9>& b,
         const std::string& mode) {
        const IoUResult r =
            iou_3d(box_from_array(a), box_from_array(b),
                   mode == "yaw_only" ? IoUMode::yaw_only : IoUMode::full);
        py::dict d;
        d["iou"] = r.iou;
        d["intersection_volume"] = r.intersection_volume;
        d["union_volume"] = r.union_volume;
        return d;
      },
      py::arg("box_a"), py::arg("box_b"), py::arg("mode") = "full",
      "Exact IoU of two 9-DoF oriented boxes.");

  m.def(
      "detect_boxes",
      [](const std::string& scene_dir, std::uint64_t seed, int n_points,
         double min_depth) {
        const SceneRecord scene = load_scene(scene_dir);
        GtOracleEstimator estimator;
        SingleSceneToolSuite suite(scene);
        const PipelineResult result =
            run_pipeline(scene, gt_anchors(scene, "detect"),
                         sampling(seed, n_points, min_depth), estimator, suite);
        std::vector<std::pair<std::string, std::array<double, 9>>> out;
        for (const auto& [label, box] : result.boxes)
          out.emplace_back(label, box.as_array());
        return out;
      },
      py::arg("scene_dir"), py::arg("seed") = 0, py::arg("n_points") = 5,
      py::arg("min_depth") = 0.1,
      "Run the deduction pipeline over a scene bundle with GT anchors.");

  m.def(
      "build_trace",
      [](const std::string& scene_dir, const std::string& task,
         std::uint64_t seed, int n_points, double min_depth) {
        const SceneRecord scene = load_scene(scene_dir);
        return trace_to_json(build_trace(scene, task, {},
                                         sampling(seed, n_points, min_depth)))
            .dump();
      },
      py::arg("scene_dir"), py::arg("task"), py::arg("seed") = 0,
      py::arg("n_points") = 5, py::arg("min_depth") = 0.1,
      "Build a verifiable reasoning trace; returns its JSON text.");

  m.def(
      "verify_trace",
      [](const std::string& scene_dir, const std::string& trace_json) {
        const SceneRecord scene = load_scene(scene_dir);
        const VerificationReport rep =
            verify_trace(trace_from_json(ojson::parse(trace_json)), scene);
        return rep.to_json().dump();
      },
      py::arg("scene_dir"), py::arg("trace_json"),
      "Re-derive a trace against its scene; returns the report JSON text.");
}
