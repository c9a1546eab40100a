#pragma once

#include <optional>
#include <string>
#include <vector>

#include "geo3d/codec.hpp"
#include "geo3d/reasoner.hpp"
#include "geo3d/scene.hpp"
#include "geo3d/tools.hpp"

namespace geo3d {

// Rounds to `decimals` places, half away from zero, normalizing -0.
double display_round(double x, int decimals);
// Fixed-point rendering of display_round(x, decimals).
std::string format_fixed(double x, int decimals);
// Box centers land on the half-pixel lattice: "344" or "344.5".
std::string format_pixel_center(double x);

struct TraceTurn {
  std::string role;  // "system" | "user" | "assistant" | "tool"
  std::string content;
};

struct TraceAnchor {
  std::string label;
  std::string category;
  std::array<double, 4> normalized{};  // per-mille box, authoritative
};

// A reproducible multi-turn transcript: think text carries every deduction
// as explicit "NAME = EXPR = VALUE" lines; tool payloads are exact JSON.
struct ReasoningTrace {
  std::string format_version = "1";
  std::string scene_id;
  std::string task;  // "detect" | "ground"
  std::string estimator = "gt_oracle";
  SamplingConfig cfg;
  std::vector<TraceAnchor> anchors;
  std::vector<TraceTurn> turns;
};

ojson trace_to_json(const ReasoningTrace& t);
ReasoningTrace trace_from_json(const ojson& j);

// For detect, target_ids are instance ids; for ground, indices into the
// scene's expression list. Empty selects every visible target.
ReasoningTrace build_trace(const SceneRecord& scene, const std::string& task,
                           const std::vector<int>& target_ids,
                           const SamplingConfig& cfg);

struct StepCheck {
  std::string step;  // structure | anchor_rounding | center | mean_depth |
                     // back_projection | intrinsics_response | depth_call |
                     // depth_response | answer
  bool pass = true;
  std::string detail;  // first divergence: what, expected, found
};

struct VerificationReport {
  bool pass = false;
  std::vector<StepCheck> checks;
  std::string first_failure;  // empty when pass

  ojson to_json() const;
};

// Re-derives every arithmetic step of a trace from the scene and compares at
// display precision; result values may differ from the re-derived rendering
// by at most tolerance_ulps units of the last displayed digit.
VerificationReport verify_trace(const ReasoningTrace& trace,
                                const SceneRecord& scene,
                                double tolerance_ulps = 0.5);

// Equation lines inside think text, for audit tooling: returns each line of
// the form "NAME = EXPR = VALUE" in turn order.
std::vector<std::string> equation_lines(const ReasoningTrace& trace);

}  // namespace geo3d
