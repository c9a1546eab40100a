#include "geo3d/trace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "geo3d/error.hpp"
#include "geo3d/protocol.hpp"

namespace geo3d {

double display_round(double x, int decimals) {
  const double scale = std::pow(10.0, decimals);
  double r = std::round(x * scale) / scale;
  if (r == 0.0) r = 0.0;  // avoid "-0.00"
  return r;
}

std::string format_fixed(double x, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, display_round(x, decimals));
  return buf;
}

std::string format_pixel_center(double x) {
  const double r = std::round(x);
  if (r == x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f", x);
    return buf;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", x);
  return buf;
}

namespace {

constexpr const char* kSystemPrompt =
    "You are a 3D spatial reasoning assistant. Use the camera_intrinsics and "
    "depth_sampling tools, show every calculation as an explicit equation "
    "line \"NAME = EXPR = VALUE\", and finish with the 9-DoF boxes in an "
    "answer block. Pixel values are integers, meters use 2 decimals, radians "
    "use 3 decimals; rounding is half away from zero.";

const char* kTimes = "×";  // multiplication sign in equation lines

std::string format_per_mille(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.0f", x);
  return buf;
}

std::string user_prompt(const SceneRecord& scene, const std::string& task,
                        const std::vector<TraceAnchor>& anchors) {
  std::ostringstream out;
  if (task == "detect")
    out << "Detect the listed objects in scene " << scene.scene_id << " ("
        << scene.meta.width << "x" << scene.meta.height
        << " image) and report one 9-DoF 3D bounding box per object.";
  else
    out << "Locate the object referred to by each expression in scene "
        << scene.scene_id << " (" << scene.meta.width << "x"
        << scene.meta.height
        << " image) and report one 9-DoF 3D bounding box per expression.";
  out << " 2D anchors are per-mille [u_min, v_min, u_max, v_max].";
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const auto& a = anchors[i];
    out << "\nTarget " << (i + 1) << ": " << a.label << " [";
    for (int j = 0; j < 4; ++j)
      out << (j ? ", " : "")
          << format_per_mille(a.normalized[static_cast<std::size_t>(j)]);
    out << "]";
  }
  return out.str();
}

struct RenderedSteps {
  std::string step1;  // anchor conversion lines
  std::string step45;  // center, mean depth, back-projection lines
};

std::string equation(const std::string& name, const std::string& expr,
                     const std::string& value) {
  return name + " = " + expr + " = " + value;
}

RenderedSteps render_steps(const SceneRecord& scene,
                           const CameraIntrinsics& k,
                           const std::vector<DeductionRecord>& records) {
  std::ostringstream s1, s45;
  s1 << "Step 1: convert each per-mille anchor to absolute pixels.";
  s45 << "Step 4: compute each 2D box center and its mean sampled depth.";
  std::ostringstream s5;
  s5 << "Step 5: back-project each center through the intrinsics.";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const DeductionRecord& r = records[i];
    const std::string t = std::to_string(i + 1);
    if (r.normalized) {
      const auto& n = *r.normalized;
      const char* names[4] = {"u_min_", "v_min_", "u_max_", "v_max_"};
      const int absolute[4] = {r.bbox.u_min, r.bbox.v_min, r.bbox.u_max,
                               r.bbox.v_max};
      for (int j = 0; j < 4; ++j) {
        const int size = (j % 2 == 0) ? scene.meta.width : scene.meta.height;
        s1 << "\n"
           << equation(names[j] + t,
                       "round(" +
                           format_per_mille(n[static_cast<std::size_t>(j)]) +
                           " " + kTimes + " " + std::to_string(size) +
                           " / 1000)",
                       std::to_string(absolute[j]));
      }
    }
    s45 << "\n"
        << equation("u_c_" + t,
                    "(" + std::to_string(r.bbox.u_min) + " + " +
                        std::to_string(r.bbox.u_max) + ") / 2",
                    format_pixel_center(r.u_c))
        << "\n"
        << equation("v_c_" + t,
                    "(" + std::to_string(r.bbox.v_min) + " + " +
                        std::to_string(r.bbox.v_max) + ") / 2",
                    format_pixel_center(r.v_c));
    if (r.no_depth) {
      s45 << "\nTarget " << t
          << " returned no valid depth samples; it is skipped.";
      continue;
    }
    std::string zs;
    for (std::size_t j = 0; j < r.samples.size(); ++j)
      zs += (j ? ", " : "") + format_fixed(r.samples[j].z, 2);
    s45 << "\n"
        << equation("Z_bar_" + t, "mean(" + zs + ")", format_fixed(r.z_bar, 2));
    const std::string uc = format_pixel_center(r.u_c);
    const std::string vc = format_pixel_center(r.v_c);
    const std::string zb = format_fixed(r.z_bar, 2);
    s5 << "\n"
       << equation("X_" + t,
                   "(" + uc + " - " + format_fixed(k.cx, 2) + ") " + kTimes +
                       " " + zb + " / " + format_fixed(k.fx, 2),
                   format_fixed(r.center_hat.x, 2))
       << "\n"
       << equation("Y_" + t,
                   "(" + vc + " - " + format_fixed(k.cy, 2) + ") " + kTimes +
                       " " + zb + " / " + format_fixed(k.fy, 2),
                   format_fixed(r.center_hat.y, 2))
       << "\n" << equation("Z_" + t, zb, zb);
  }
  RenderedSteps out;
  out.step1 = s1.str() + "\nStep 2: retrieve the camera intrinsics.";
  out.step45 = s45.str() + "\n" + s5.str();
  return out;
}

}  // namespace

ojson trace_to_json(const ReasoningTrace& t) {
  ojson j;
  j["format_version"] = t.format_version;
  j["scene_id"] = t.scene_id;
  j["task"] = t.task;
  j["estimator"] = t.estimator;
  j["seed"] = t.cfg.seed;
  j["n_points"] = t.cfg.n_points;
  j["min_depth"] = t.cfg.min_depth;
  j["anchors"] = ojson::array();
  for (const auto& a : t.anchors) {
    ojson ja;
    ja["label"] = a.label;
    ja["category"] = a.category;
    ja["normalized"] = ojson::array(
        {static_cast<std::int64_t>(a.normalized[0]),
         static_cast<std::int64_t>(a.normalized[1]),
         static_cast<std::int64_t>(a.normalized[2]),
         static_cast<std::int64_t>(a.normalized[3])});
    j["anchors"].push_back(std::move(ja));
  }
  j["turns"] = ojson::array();
  for (const auto& turn : t.turns)
    j["turns"].push_back(ojson{{"role", turn.role}, {"content", turn.content}});
  return j;
}

ReasoningTrace trace_from_json(const ojson& j) {
  ReasoningTrace t;
  t.format_version = require_string(j, "format_version", "trace");
  if (t.format_version != "1")
    fail(ErrorKind::parse, "unsupported trace format_version " +
                               t.format_version);
  t.scene_id = require_string(j, "scene_id", "trace");
  t.task = require_string(j, "task", "trace");
  t.estimator = require_string(j, "estimator", "trace");
  t.cfg.seed = static_cast<std::uint64_t>(require_int(j, "seed", "trace"));
  t.cfg.n_points = static_cast<int>(require_int(j, "n_points", "trace"));
  t.cfg.min_depth = require_real(j, "min_depth", "trace");
  t.cfg.validate();
  const ojson& anchors = require_field(j, "anchors", "trace");
  if (!anchors.is_array())
    fail(ErrorKind::parse, "trace: \"anchors\" must be an array");
  for (const auto& ja : anchors) {
    TraceAnchor a;
    a.label = require_string(ja, "label", "trace anchor");
    a.category = require_string(ja, "category", "trace anchor");
    const ojson& n = require_field(ja, "normalized", "trace anchor");
    if (!n.is_array() || n.size() != 4)
      fail(ErrorKind::parse, "trace anchor: \"normalized\" must hold 4 values");
    for (std::size_t i = 0; i < 4; ++i) {
      if (!n[i].is_number())
        fail(ErrorKind::parse, "trace anchor: normalized entries are numbers");
      a.normalized[i] = n[i].get<double>();
    }
    t.anchors.push_back(std::move(a));
  }
  const ojson& turns = require_field(j, "turns", "trace");
  if (!turns.is_array())
    fail(ErrorKind::parse, "trace: \"turns\" must be an array");
  for (const auto& jt : turns)
    t.turns.push_back({require_string(jt, "role", "trace turn"),
                       require_string(jt, "content", "trace turn")});
  return t;
}

ReasoningTrace build_trace(const SceneRecord& scene, const std::string& task,
                           const std::vector<int>& target_ids,
                           const SamplingConfig& cfg) {
  cfg.validate();
  AnchorSet anchors = gt_anchors(scene, task);
  if (!target_ids.empty()) {
    AnchorSet filtered;
    if (task == "detect") {
      std::set<int> wanted(target_ids.begin(), target_ids.end());
      AnchorSet all = anchors;
      anchors.clear();
      std::size_t pos = 0;
      for (const auto& inst : scene.instances) {
        try {
          project_box_to_2d(inst.box3d, scene.intrinsics, scene.meta);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::not_visible) throw;
          continue;
        }
        if (wanted.count(inst.instance_id)) anchors.push_back(all[pos]);
        ++pos;
      }
    } else {
      for (int idx : target_ids)
        if (idx >= 0 && static_cast<std::size_t>(idx) < anchors.size())
          filtered.push_back(anchors[static_cast<std::size_t>(idx)]);
      anchors = std::move(filtered);
    }
  }
  if (anchors.empty())
    fail(ErrorKind::validation,
         "no visible targets to trace in scene " + scene.scene_id);

  GtOracleEstimator estimator;
  SingleSceneToolSuite suite(scene);
  const PipelineResult result =
      run_pipeline(scene, anchors, cfg, estimator, suite);

  ReasoningTrace t;
  t.scene_id = scene.scene_id;
  t.task = task;
  t.cfg = cfg;
  for (const auto& a : anchors)
    t.anchors.push_back({a.label, a.category, *a.normalized});

  const RenderedSteps steps = render_steps(scene, result.intrinsics,
                                           result.records);

  std::vector<DepthQuery> queries;
  for (const auto& r : result.records) queries.push_back({r.category, r.bbox});

  ToolCallBlock intrinsics_call;
  intrinsics_call.call_id = "1";
  intrinsics_call.tool_name = "camera_intrinsics";
  intrinsics_call.arguments = ojson::object();
  ToolResponseBlock intrinsics_response;
  intrinsics_response.call_id = "1";
  intrinsics_response.result = intrinsics_to_json(result.intrinsics);

  ToolCallBlock depth_call;
  depth_call.call_id = "2";
  depth_call.tool_name = "depth_sampling";
  depth_call.arguments = depth_sampling_args_to_json(queries, cfg);
  std::vector<std::vector<DepthSample>> samples;
  for (const auto& r : result.records) samples.push_back(r.samples);
  ToolResponseBlock depth_response;
  depth_response.call_id = "2";
  depth_response.result = samples_to_json(samples);

  AnswerBlock answer;
  for (const auto& [label, box] : result.boxes)
    answer.boxes.push_back({label, box});

  t.turns.push_back({"system", kSystemPrompt});
  t.turns.push_back({"user", user_prompt(scene, task, t.anchors)});
  t.turns.push_back(
      {"assistant", serialize_blocks({ThinkBlock{steps.step1},
                                      intrinsics_call})});
  t.turns.push_back({"tool", serialize_blocks({intrinsics_response})});
  t.turns.push_back(
      {"assistant",
       serialize_blocks(
           {ThinkBlock{"Step 3: sample depth points inside each 2D box."},
            depth_call})});
  t.turns.push_back({"tool", serialize_blocks({depth_response})});
  t.turns.push_back(
      {"assistant", serialize_blocks({ThinkBlock{steps.step45}, answer})});
  return t;
}

namespace {

// ---- equation line parsing ----------------------------------------------

struct EqLine {
  std::string name;
  std::string expr;
  std::string value;
  std::string text;
};

bool is_name_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}

std::optional<EqLine> match_equation_line(const std::string& line) {
  if (line.empty() || !is_name_start(line[0])) return std::nullopt;
  const std::size_t first = line.find(" = ");
  if (first == std::string::npos) return std::nullopt;
  const std::size_t last = line.rfind(" = ");
  if (last == first) return std::nullopt;  // need NAME = EXPR = VALUE
  EqLine e;
  e.name = line.substr(0, first);
  e.expr = line.substr(first + 3, last - first - 3);
  e.value = line.substr(last + 3);
  e.text = line;
  for (char c : e.name)
    if (!(is_name_start(c) || (c >= '0' && c <= '9'))) return std::nullopt;
  return e;
}

// Numeric tokens of an expression; accepts * or U+00D7 for times and
// ASCII '-' or U+2212 for minus, plus round/mean/parens/commas.
std::optional<std::vector<double>> expr_numbers(const std::string& expr) {
  std::vector<double> out;
  std::size_t i = 0;
  const std::size_t n = expr.size();
  while (i < n) {
    const char c = expr[i];
    if (c == ' ' || c == '(' || c == ')' || c == ',' || c == '+' ||
        c == '/' || c == '*') {
      ++i;
      continue;
    }
    if (static_cast<unsigned char>(c) == 0xc3 && i + 1 < n &&
        static_cast<unsigned char>(expr[i + 1]) == 0x97) {
      i += 2;  // U+00D7 times
      continue;
    }
    if (static_cast<unsigned char>(c) == 0xe2 && i + 2 < n &&
        static_cast<unsigned char>(expr[i + 1]) == 0x88 &&
        static_cast<unsigned char>(expr[i + 2]) == 0x92) {
      i += 3;  // U+2212 minus
      continue;
    }
    if (c == '-') {
      // Operator when followed by whitespace; otherwise a number sign.
      if (i + 1 < n && expr[i + 1] == ' ') {
        ++i;
        continue;
      }
    }
    if (c == 'r' && expr.compare(i, 6, "round(") == 0) {
      i += 6;
      continue;
    }
    if (c == 'm' && expr.compare(i, 5, "mean(") == 0) {
      i += 5;
      continue;
    }
    if (c == '-' || (c >= '0' && c <= '9')) {
      std::size_t j = i + (c == '-' ? 1 : 0);
      if (j >= n || !(expr[j] >= '0' && expr[j] <= '9')) return std::nullopt;
      while (j < n && expr[j] >= '0' && expr[j] <= '9') ++j;
      if (j < n && expr[j] == '.') {
        ++j;
        if (j >= n || !(expr[j] >= '0' && expr[j] <= '9')) return std::nullopt;
        while (j < n && expr[j] >= '0' && expr[j] <= '9') ++j;
      }
      out.push_back(std::stod(expr.substr(i, j - i)));
      i = j;
      continue;
    }
    return std::nullopt;
  }
  return out;
}

std::optional<double> parse_value(const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  if (pos != text.size()) return std::nullopt;
  return v;
}

// ---- verification ---------------------------------------------------------

class Verifier {
 public:
  Verifier(const ReasoningTrace& trace, const SceneRecord& scene,
           double tolerance_ulps)
      : trace_(trace), scene_(scene), tol_(tolerance_ulps) {
    static const char* kSteps[] = {
        "structure",       "anchor_rounding",     "center",
        "mean_depth",      "back_projection",     "intrinsics_response",
        "depth_call",      "depth_response",      "answer"};
    for (const char* s : kSteps) order_.emplace_back(s);
  }

  VerificationReport run() {
    try {
      recompute();
      check_structure();
      if (ok("structure")) {
        check_equations();
        check_payloads();
        check_answer();
      }
    } catch (const Error& e) {
      record("structure", std::string("verification aborted: ") + e.what());
    }
    VerificationReport report;
    report.pass = true;
    for (const auto& step : order_) {
      StepCheck c;
      c.step = step;
      auto it = failures_.find(step);
      c.pass = it == failures_.end();
      if (!c.pass) {
        c.detail = it->second;
        if (report.pass) report.first_failure = step + ": " + it->second;
        report.pass = false;
      }
      report.checks.push_back(std::move(c));
    }
    return report;
  }

 private:
  void record(const std::string& step, const std::string& detail) {
    failures_.emplace(step, detail);  // keep the first divergence per step
  }
  bool ok(const std::string& step) const { return !failures_.count(step); }

  void recompute() {
    if (trace_.scene_id != scene_.scene_id)
      fail(ErrorKind::validation, "trace scene_id " + trace_.scene_id +
                                      " does not match scene " +
                                      scene_.scene_id);
    if (trace_.estimator != "gt_oracle")
      fail(ErrorKind::validation,
           "only gt_oracle traces can be re-derived, got " + trace_.estimator);
    AnchorSet anchors;
    for (const auto& a : trace_.anchors) {
      AnchorTarget t;
      t.label = a.label;
      t.category = a.category;
      t.normalized = a.normalized;
      anchors.push_back(std::move(t));
    }
    GtOracleEstimator estimator;
    SingleSceneToolSuite suite(scene_);
    expected_ = run_pipeline(scene_, anchors, trace_.cfg, estimator, suite);
  }

  void check_structure() {
    if (trace_.turns.size() < 2) {
      record("structure", "trace has fewer than 2 turns");
      return;
    }
    int answers = 0;
    std::vector<std::string> open_calls;
    for (std::size_t i = 0; i < trace_.turns.size(); ++i) {
      const TraceTurn& turn = trace_.turns[i];
      if (turn.role != "system" && turn.role != "user" &&
          turn.role != "assistant" && turn.role != "tool") {
        record("structure", "turn " + std::to_string(i) + " has unknown role " +
                                turn.role);
        return;
      }
      if (turn.role == "system" || turn.role == "user") continue;
      std::vector<Block> blocks;
      try {
        blocks = parse_turn(turn.content);
      } catch (const Error& e) {
        record("structure",
               "turn " + std::to_string(i) + ": " + e.what());
        return;
      }
      for (const auto& block : blocks) {
        if (const auto* call = std::get_if<ToolCallBlock>(&block)) {
          open_calls.push_back(call->call_id);
          calls_.push_back(*call);
        } else if (const auto* resp = std::get_if<ToolResponseBlock>(&block)) {
          if (open_calls.empty() || open_calls.front() != resp->call_id) {
            record("structure",
                   "tool_response call_id " + resp->call_id +
                       " does not match any pending tool_call");
            return;
          }
          open_calls.erase(open_calls.begin());
          responses_.push_back(*resp);
        } else if (const auto* ans = std::get_if<AnswerBlock>(&block)) {
          ++answers;
          answer_ = *ans;
          if (i + 1 != trace_.turns.size())
            record("structure", "answer block appears before the final turn");
        } else if (const auto* think = std::get_if<ThinkBlock>(&block)) {
          thinks_.push_back(think->text);
        }
      }
    }
    if (!open_calls.empty())
      record("structure",
             "tool_call " + open_calls.front() + " has no tool_response");
    if (answers != 1)
      record("structure", "expected exactly one answer block, found " +
                              std::to_string(answers));
  }

  struct ExpectedLine {
    std::string step;
    std::string name;
    std::vector<double> operands;
    double value;       // display-lattice expectation
    int decimals;       // -1: integer/exact, else tolerance applies
  };

  std::vector<ExpectedLine> expected_lines() const {
    std::vector<ExpectedLine> out;
    const CameraIntrinsics& k = expected_.intrinsics;
    for (std::size_t i = 0; i < expected_.records.size(); ++i) {
      const DeductionRecord& r = expected_.records[i];
      const std::string t = std::to_string(i + 1);
      if (r.normalized) {
        const auto& n = *r.normalized;
        const char* names[4] = {"u_min_", "v_min_", "u_max_", "v_max_"};
        const int absolute[4] = {r.bbox.u_min, r.bbox.v_min, r.bbox.u_max,
                                 r.bbox.v_max};
        for (int j = 0; j < 4; ++j) {
          const double size =
              (j % 2 == 0) ? scene_.meta.width : scene_.meta.height;
          out.push_back({"anchor_rounding", names[j] + t,
                         {n[static_cast<std::size_t>(j)], size, 1000.0},
                         static_cast<double>(absolute[j]),
                         -1});
        }
      }
      out.push_back({"center",
                     "u_c_" + t,
                     {static_cast<double>(r.bbox.u_min),
                      static_cast<double>(r.bbox.u_max), 2.0},
                     r.u_c,
                     -1});
      out.push_back({"center",
                     "v_c_" + t,
                     {static_cast<double>(r.bbox.v_min),
                      static_cast<double>(r.bbox.v_max), 2.0},
                     r.v_c,
                     -1});
      if (r.no_depth) continue;
      ExpectedLine zbar;
      zbar.step = "mean_depth";
      zbar.name = "Z_bar_" + t;
      for (const auto& s : r.samples)
        zbar.operands.push_back(display_round(s.z, 2));
      zbar.value = display_round(r.z_bar, 2);
      zbar.decimals = 2;
      out.push_back(std::move(zbar));
      const double uc = r.u_c;  // exact on the half-pixel lattice
      const double vc = r.v_c;
      const double zb = display_round(r.z_bar, 2);
      out.push_back({"back_projection",
                     "X_" + t,
                     {uc, display_round(k.cx, 2), zb, display_round(k.fx, 2)},
                     display_round(r.center_hat.x, 2),
                     2});
      out.push_back({"back_projection",
                     "Y_" + t,
                     {vc, display_round(k.cy, 2), zb, display_round(k.fy, 2)},
                     display_round(r.center_hat.y, 2),
                     2});
      out.push_back({"back_projection", "Z_" + t, {zb}, zb, 2});
    }
    return out;
  }

  void check_equations() {
    std::map<std::string, EqLine> found;
    for (const std::string& think : thinks_) {
      std::istringstream in(think);
      std::string line;
      while (std::getline(in, line)) {
        auto eq = match_equation_line(line);
        if (!eq) continue;
        if (found.count(eq->name)) {
          record("structure", "duplicate equation line for " + eq->name);
          return;
        }
        found.emplace(eq->name, *eq);
      }
    }
    std::set<std::string> expected_names;
    for (const ExpectedLine& want : expected_lines()) {
      expected_names.insert(want.name);
      auto it = found.find(want.name);
      if (it == found.end()) {
        record(want.step, "missing equation line " + want.name);
        continue;
      }
      const EqLine& got = it->second;
      const auto operands = expr_numbers(got.expr);
      if (!operands) {
        record(want.step, want.name + ": unparsable expression \"" +
                              got.expr + "\"");
        continue;
      }
      if (operands->size() != want.operands.size()) {
        record(want.step,
               want.name + ": expected " +
                   std::to_string(want.operands.size()) + " operands, found " +
                   std::to_string(operands->size()));
        continue;
      }
      bool operand_bad = false;
      for (std::size_t i = 0; i < operands->size(); ++i) {
        if ((*operands)[i] != want.operands[i]) {
          record(want.step,
                 want.name + ": operand " + std::to_string(i + 1) +
                     " expected " + format_fixed(want.operands[i], 4) +
                     ", found " + format_fixed((*operands)[i], 4));
          operand_bad = true;
          break;
        }
      }
      if (operand_bad) continue;
      const auto value = parse_value(got.value);
      if (!value) {
        record(want.step,
               want.name + ": unparsable value \"" + got.value + "\"");
        continue;
      }
      if (want.decimals < 0) {
        if (*value != want.value)
          record(want.step, want.name + ": expected value " +
                                format_pixel_center(want.value) + ", found " +
                                got.value);
      } else {
        const double ulp = std::pow(10.0, -want.decimals);
        if (std::abs(*value - want.value) > tol_ * ulp)
          record(want.step, want.name + ": expected value " +
                                format_fixed(want.value, want.decimals) +
                                ", found " + got.value);
      }
    }
    for (const auto& [name, eq] : found)
      if (!expected_names.count(name))
        record("structure", "unexpected equation line " + name);
  }

  void check_payloads() {
    ToolCallBlock expected_intrinsics_call;
    expected_intrinsics_call.tool_name = "camera_intrinsics";
    expected_intrinsics_call.arguments = ojson::object();

    const ToolCallBlock* intrinsics_call = nullptr;
    const ToolCallBlock* depth_call = nullptr;
    for (const auto& call : calls_) {
      if (call.tool_name == "camera_intrinsics" && !intrinsics_call)
        intrinsics_call = &call;
      else if (call.tool_name == "depth_sampling" && !depth_call)
        depth_call = &call;
    }
    if (!intrinsics_call || !depth_call) {
      record("depth_call", "trace must call camera_intrinsics and "
                           "depth_sampling once each");
      return;
    }

    std::vector<DepthQuery> queries;
    for (const auto& r : expected_.records)
      queries.push_back({r.category, r.bbox});
    const ojson want_args = depth_sampling_args_to_json(queries, trace_.cfg);
    if (depth_call->arguments != want_args)
      record("depth_call", "depth_sampling arguments expected " +
                               want_args.dump() + ", found " +
                               depth_call->arguments.dump());

    const ojson want_intrinsics = intrinsics_to_json(expected_.intrinsics);
    std::vector<std::vector<DepthSample>> samples;
    for (const auto& r : expected_.records) samples.push_back(r.samples);
    const ojson want_samples = samples_to_json(samples);
    for (const auto& resp : responses_) {
      if (resp.call_id == intrinsics_call->call_id) {
        if (!resp.result || *resp.result != want_intrinsics)
          record("intrinsics_response",
                 "intrinsics result expected " + want_intrinsics.dump() +
                     ", found " + (resp.result ? resp.result->dump() : "error"));
      } else if (resp.call_id == depth_call->call_id) {
        if (!resp.result || *resp.result != want_samples)
          record("depth_response",
                 "depth samples expected " + want_samples.dump() + ", found " +
                     (resp.result ? resp.result->dump() : "error"));
      }
    }
  }

  void check_answer() {
    if (!answer_) {
      record("answer", "no answer block");
      return;
    }
    if (answer_->boxes.size() != expected_.boxes.size()) {
      record("answer",
             "expected " + std::to_string(expected_.boxes.size()) +
                 " boxes, found " + std::to_string(answer_->boxes.size()));
      return;
    }
    for (std::size_t i = 0; i < expected_.boxes.size(); ++i) {
      const auto& [label, box] = expected_.boxes[i];
      const AnswerItem& item = answer_->boxes[i];
      if (item.label != label) {
        record("answer", "box " + std::to_string(i) + ": expected label \"" +
                             label + "\", found \"" + item.label + "\"");
        return;
      }
      if (item.box.as_array() != box.as_array()) {
        record("answer",
               "box " + std::to_string(i) + " (\"" + label +
                   "\"): center/extents/angles do not match the deduction");
        return;
      }
    }
  }

  const ReasoningTrace& trace_;
  const SceneRecord& scene_;
  double tol_;
  PipelineResult expected_;
  std::vector<std::string> order_;
  std::map<std::string, std::string> failures_;
  std::vector<std::string> thinks_;
  std::vector<ToolCallBlock> calls_;
  std::vector<ToolResponseBlock> responses_;
  std::optional<AnswerBlock> answer_;
};

}  // namespace

ojson VerificationReport::to_json() const {
  ojson j;
  j["pass"] = pass;
  j["first_failure"] = first_failure;
  j["checks"] = ojson::array();
  for (const auto& c : checks)
    j["checks"].push_back(
        ojson{{"step", c.step}, {"pass", c.pass}, {"detail", c.detail}});
  return j;
}

VerificationReport verify_trace(const ReasoningTrace& trace,
                                const SceneRecord& scene,
                                double tolerance_ulps) {
  Verifier v(trace, scene, tolerance_ulps);
  return v.run();
}

std::vector<std::string> equation_lines(const ReasoningTrace& trace) {
  std::vector<std::string> out;
  for (const auto& turn : trace.turns) {
    if (turn.role != "assistant") continue;
    std::vector<Block> blocks;
    try {
      blocks = parse_turn(turn.content);
    } catch (const Error&) {
      continue;
    }
    for (const auto& block : blocks) {
      if (const auto* think = std::get_if<ThinkBlock>(&block)) {
        std::istringstream in(think->text);
        std::string line;
        while (std::getline(in, line))
          if (match_equation_line(line)) out.push_back(line);
      }
    }
  }
  return out;
}

}  // namespace geo3d
