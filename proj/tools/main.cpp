// geo3d command line front end. Exit codes: 0 success, 1 data/validation
// failure, 2 usage or configuration error. Diagnostics go to stderr; results
// go to --out files or stdout.
#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "geo3d/config.hpp"
#include "geo3d/error.hpp"
#include "geo3d/eval.hpp"
#include "geo3d/raster.hpp"
#include "geo3d/reasoner.hpp"
#include "geo3d/scene.hpp"
#include "geo3d/server.hpp"
#include "geo3d/tools.hpp"
#include "geo3d/trace.hpp"

using namespace geo3d;

namespace {

void write_text(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) fail(ErrorKind::io, "cannot open output file " + out_path);
  f << text;
  if (!f) fail(ErrorKind::io, "write failed for " + out_path);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double csv_real(const std::string& field, const std::string& where) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(field, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != field.size() || field.empty())
    fail(ErrorKind::parse, where + ": expected a number, got \"" + field + "\"");
  return v;
}

int csv_int(const std::string& field, const std::string& where) {
  const double v = csv_real(field, where);
  const int i = static_cast<int>(v);
  if (double(i) != v)
    fail(ErrorKind::parse, where + ": expected an integer, got \"" + field + "\"");
  return i;
}

// ------------------------------------------------------------- ingest ----
//
// CSV layout (headers required, paths relative to --csv-dir):
//   scenes.csv:      scene_id,width,height,fx,fy,cx,cy,depth_file
//   instances.csv:   scene_id,instance_id,category,cx,cy,cz,l,w,h,
//                    yaw,pitch,roll,mask_file
//   expressions.csv: scene_id,instance_id,text   (text may contain commas)

int cmd_ingest(const std::string& csv_dir, const std::string& out_root) {
  std::map<std::string, SceneRecord> scenes;

  const auto scene_rows = read_lines(csv_dir + "/scenes.csv");
  for (std::size_t i = 1; i < scene_rows.size(); ++i) {
    if (scene_rows[i].empty()) continue;
    const auto f = split_csv(scene_rows[i]);
    const std::string where = "scenes.csv line " + std::to_string(i + 1);
    if (f.size() != 8) fail(ErrorKind::parse, where + ": expected 8 fields");
    SceneRecord s;
    s.scene_id = f[0];
    s.meta = ImageMeta{csv_int(f[1], where), csv_int(f[2], where)};
    s.intrinsics = CameraIntrinsics{csv_real(f[3], where), csv_real(f[4], where),
                                    csv_real(f[5], where), csv_real(f[6], where)};
    s.depth_path = "depth.raw";
    s.depth = load_depth_raster(csv_dir + "/" + f[7]);
    if (!scenes.emplace(s.scene_id, std::move(s)).second)
      fail(ErrorKind::validation, where + ": duplicate scene_id " + f[0]);
  }

  const auto inst_rows = read_lines(csv_dir + "/instances.csv");
  for (std::size_t i = 1; i < inst_rows.size(); ++i) {
    if (inst_rows[i].empty()) continue;
    const auto f = split_csv(inst_rows[i]);
    const std::string where = "instances.csv line " + std::to_string(i + 1);
    if (f.size() != 13) fail(ErrorKind::parse, where + ": expected 13 fields");
    const auto it = scenes.find(f[0]);
    if (it == scenes.end())
      fail(ErrorKind::referential, where + ": unknown scene_id " + f[0]);
    InstanceGT g;
    g.instance_id = csv_int(f[1], where);
    g.category = f[2];
    g.box3d = Box3D({csv_real(f[3], where), csv_real(f[4], where),
                     csv_real(f[5], where)},
                    csv_real(f[6], where), csv_real(f[7], where),
                    csv_real(f[8], where), csv_real(f[9], where),
                    csv_real(f[10], where), csv_real(f[11], where));
    g.mask_path = "mask_" + std::to_string(g.instance_id) + ".raw";
    g.mask = load_mask_raster(csv_dir + "/" + f[12]);
    it->second.instances.push_back(std::move(g));
  }

  const auto expr_rows = read_lines(csv_dir + "/expressions.csv");
  for (std::size_t i = 1; i < expr_rows.size(); ++i) {
    if (expr_rows[i].empty()) continue;
    const auto f = split_csv(expr_rows[i]);
    const std::string where = "expressions.csv line " + std::to_string(i + 1);
    if (f.size() < 3) fail(ErrorKind::parse, where + ": expected 3 fields");
    const auto it = scenes.find(f[0]);
    if (it == scenes.end())
      fail(ErrorKind::referential, where + ": unknown scene_id " + f[0]);
    Expression e;
    e.instance_id = csv_int(f[1], where);
    e.text = f[2];
    for (std::size_t j = 3; j < f.size(); ++j) e.text += "," + f[j];
    it->second.expressions.push_back(std::move(e));
  }

  for (auto& [id, scene] : scenes) {
    scene.validate();
    save_scene(scene, out_root + "/" + id);
    std::cerr << "ingested " << id << " (" << scene.instances.size()
              << " instances, " << scene.expressions.size()
              << " expressions)\n";
  }
  std::cerr << scenes.size() << " scene bundle(s) written to " << out_root
            << "\n";
  return 0;
}

// --------------------------------------------------------- gen-traces ----

int cmd_gen_traces(const RunConfig& cfg) {
  if (cfg.estimator != "gt_oracle")
    fail(ErrorKind::config,
         "traces re-derive ground truth; estimator must be gt_oracle");
  const SceneStore store(cfg.root);
  std::ostringstream out;
  out << ojson{{"provenance", provenance_json(cfg)}}.dump() << "\n";
  std::size_t written = 0;
  for (const std::string& id : store.ids()) {
    try {
      const ReasoningTrace t =
          build_trace(store.get(id), cfg.task, {}, cfg.sampling);
      out << trace_to_json(t).dump() << "\n";
      ++written;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::validation) throw;
      std::cerr << "skipping " << id << ": " << e.what() << "\n";
    }
  }
  write_text(cfg.out_path, out.str());
  std::cerr << written << " trace(s) generated\n";
  return 0;
}

// ------------------------------------------------------ verify-traces ----

int cmd_verify_traces(const RunConfig& cfg, const std::string& traces_path) {
  const SceneStore store(cfg.root);
  const std::vector<std::string> lines = read_lines(traces_path);
  ojson results = ojson::array();
  std::size_t passed = 0, failed = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    ojson j;
    try {
      j = ojson::parse(lines[i]);
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorKind::parse, traces_path + " line " + std::to_string(i + 1) +
                                 ": " + e.what());
    }
    if (i == 0 && j.contains("provenance")) continue;
    const ReasoningTrace t = trace_from_json(j);
    const VerificationReport rep = verify_trace(t, store.get(t.scene_id));
    ojson r;
    r["scene_id"] = t.scene_id;
    r["task"] = t.task;
    r["pass"] = rep.pass;
    r["first_failure"] = rep.first_failure;
    results.push_back(std::move(r));
    if (rep.pass) {
      ++passed;
    } else {
      ++failed;
      std::cerr << "FAIL " << t.scene_id << " " << t.task << ": "
                << rep.first_failure << "\n";
    }
  }
  ojson out;
  out["provenance"] = provenance_json(cfg);
  out["passed"] = passed;
  out["failed"] = failed;
  out["results"] = std::move(results);
  write_text(cfg.out_path, out.dump(2) + "\n");
  std::cerr << passed << " passed, " << failed << " failed\n";
  return failed == 0 ? 0 : 1;
}

// -------------------------------------------------------- serve-tools ----

int cmd_serve_tools(const RunConfig& cfg, const std::string& tcp_addr) {
  const SceneStore store(cfg.root);
  if (tcp_addr.empty()) {
    std::cerr << "serving " << store.size() << " scene(s) on stdio\n";
    serve_stdio(store, std::cin, std::cout);
    return 0;
  }
  TcpToolServer server(store, tcp_addr);
  std::cerr << "serving " << store.size() << " scene(s) on port "
            << server.port() << "\n";
  server.run();
  return 0;
}

// -------------------------------------------------------------- eval ----

std::map<std::string, ojson> load_predictions(const std::string& path) {
  std::map<std::string, ojson> by_scene;
  const std::vector<std::string> lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    ojson j;
    try {
      j = ojson::parse(lines[i]);
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorKind::parse,
           path + " line " + std::to_string(i + 1) + ": " + e.what());
    }
    if (i == 0 && j.contains("provenance")) continue;
    const std::string id = require_string(j, "scene_id", "prediction line");
    if (!by_scene.emplace(id, std::move(j)).second)
      fail(ErrorKind::validation,
           path + ": duplicate predictions for scene " + id);
  }
  return by_scene;
}

int cmd_eval_detect(const RunConfig& cfg, const std::string& pred_path) {
  const SceneStore store(cfg.root);
  const auto preds_by_scene = load_predictions(pred_path);
  for (const auto& [id, _] : preds_by_scene)
    store.get(id);  // unknown scene ids are a data error

  std::set<std::string> category_set;
  if (!cfg.category_set_path.empty())
    category_set = load_category_set(cfg.category_set_path);

  ConfusionAccumulator acc(cfg.threshold);
  for (const std::string& id : store.ids()) {
    const SceneRecord& scene = store.get(id);
    std::vector<LabeledBox> gts;
    for (const InstanceGT& g : scene.instances)
      gts.push_back({g.category, g.box3d});
    std::vector<LabeledBox> preds;
    const auto it = preds_by_scene.find(id);
    if (it != preds_by_scene.end()) {
      const ojson& boxes = require_field(it->second, "boxes", "prediction");
      if (!boxes.is_array())
        fail(ErrorKind::parse, "prediction for " + id +
                                   ": \"boxes\" must be an array");
      for (const ojson& jb : boxes)
        preds.push_back({require_string(jb, "label", "prediction box"),
                         box3d_from_json(
                             require_field(jb, "bbox_3d", "prediction box"))});
    }
    acc.add(preds, gts);
  }
  const DetectionReport report =
      acc.report(category_set, cfg.category_set_path.empty()
                                   ? "all"
                                   : cfg.category_set_path);
  ojson out;
  out["provenance"] = provenance_json(cfg);
  out["detection"] = report.to_json();
  write_text(cfg.out_path, out.dump(2) + "\n");
  std::cerr << "avg F1 over " << report.per_category.size()
            << " categories: " << report.avg_f1 << "\n";
  return 0;
}

int cmd_eval_ground(const RunConfig& cfg, const std::string& pred_path) {
  const SceneStore store(cfg.root);
  const auto preds_by_scene = load_predictions(pred_path);
  for (const auto& [id, _] : preds_by_scene) store.get(id);

  std::vector<std::optional<Box3D>> preds;
  std::vector<Box3D> gts;
  for (const std::string& id : store.ids()) {
    const SceneRecord& scene = store.get(id);
    const auto it = preds_by_scene.find(id);
    const ojson* boxes = nullptr;
    if (it != preds_by_scene.end()) {
      boxes = &require_field(it->second, "boxes", "prediction");
      if (!boxes->is_array())
        fail(ErrorKind::parse,
             "prediction for " + id + ": \"boxes\" must be an array");
      if (boxes->size() != scene.expressions.size())
        fail(ErrorKind::dimension_mismatch,
             "prediction for " + id + ": " + std::to_string(boxes->size()) +
                 " boxes for " + std::to_string(scene.expressions.size()) +
                 " expressions");
    }
    for (std::size_t q = 0; q < scene.expressions.size(); ++q) {
      gts.push_back(scene.instance(scene.expressions[q].instance_id).box3d);
      if (boxes && !(*boxes)[q].is_null())
        preds.push_back(box3d_from_json((*boxes)[q]));
      else
        preds.push_back(std::nullopt);
    }
  }
  const double acc = gts.empty()
                         ? 0.0
                         : grounding_accuracy(preds, gts, cfg.threshold);
  ojson out;
  out["provenance"] = provenance_json(cfg);
  out["grounding"] = ojson{{"accuracy", acc},
                           {"evaluated", gts.size()},
                           {"threshold", cfg.threshold}};
  write_text(cfg.out_path, out.dump(2) + "\n");
  std::cerr << "grounding accuracy over " << gts.size()
            << " expressions: " << acc << "\n";
  return 0;
}

// -------------------------------------------------------------- sweep ----

int cmd_sweep(const RunConfig& cfg, bool frozen, bool as_table) {
  const SceneStore store(cfg.root);
  std::vector<SceneRecord> scenes;
  for (const std::string& id : store.ids()) scenes.push_back(store.get(id));
  std::vector<const SceneRecord*> corpus;
  for (const SceneRecord& s : scenes) corpus.push_back(&s);

  SweepOptions options;
  options.task = cfg.task;
  options.cfg = cfg.sampling;
  options.threshold = cfg.threshold;
  options.freeze_intrinsics = frozen;
  options.label = frozen ? "frozen" : "oracle";
  const SweepReport report = rescale_sweep(corpus, options);

  for (const SweepEntry& e : report.entries)
    for (const std::string& err : e.errors)
      std::cerr << "factor " << e.factor << ": " << err << "\n";

  if (as_table) {
    write_text(cfg.out_path, sweep_table({report}));
    return 0;
  }
  ojson out = report.to_json();
  out["provenance"] = provenance_json(cfg);
  write_text(cfg.out_path, out.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------- iou ----

Box3D parse_box_spec(const std::string& spec, const std::string& which) {
  const auto f = split_csv(spec);
  if (f.size() != 9)
    fail(ErrorKind::config,
         which + ": expected 9 comma-separated reals, got " +
             std::to_string(f.size()));
  double v[9];
  for (int i = 0; i < 9; ++i) v[i] = csv_real(f[std::size_t(i)], which);
  return Box3D({v[0], v[1], v[2]}, v[3], v[4], v[5], v[6], v[7], v[8]);
}

int cmd_iou(const std::string& a_spec, const std::string& b_spec,
            const std::string& mode_name, const std::string& out_path) {
  const IoUMode mode =
      mode_name == "yaw_only" ? IoUMode::yaw_only : IoUMode::full;
  Box3D a{{0, 0, 1}, 1, 1, 1, 0, 0, 0}, b = a;
  try {
    a = parse_box_spec(a_spec, "--box-a");
    b = parse_box_spec(b_spec, "--box-b");
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::parse || e.kind() == ErrorKind::config)
      throw Error(ErrorKind::config, e.what());
    throw;
  }
  const IoUResult r = iou_3d(a, b, mode);
  ojson out;
  out["iou"] = r.iou;
  out["intersection_volume"] = r.intersection_volume;
  out["union_volume"] = r.union_volume;
  write_text(out_path, out.dump() + "\n");
  return 0;
}

// --------------------------------------------------------------- main ----

struct CommonFlags {
  std::string config_path;
  std::string root, task, estimator, out, category_set;
  double threshold = 0.25;
  std::uint64_t seed = 0;
  int n_points = 5;
  double min_depth = 0.1;

  CLI::Option *root_o = nullptr, *task_o = nullptr, *estimator_o = nullptr,
              *out_o = nullptr, *catset_o = nullptr, *threshold_o = nullptr,
              *seed_o = nullptr, *n_points_o = nullptr, *min_depth_o = nullptr;

  void attach(CLI::App* cmd, bool with_root = true) {
    cmd->add_option("--config", config_path,
                    "key=value config file (flags take precedence)");
    if (with_root)
      root_o = cmd->add_option("--root", root, "scene bundle directory");
    task_o = cmd->add_option("--task", task, "detect | ground");
    estimator_o = cmd->add_option("--estimator", estimator,
                                  "gt_oracle | category_prior");
    out_o = cmd->add_option("--out", out, "output file (default: stdout)");
    catset_o = cmd->add_option("--category-set", category_set,
                               "file with one category per line");
    threshold_o =
        cmd->add_option("--iou-threshold", threshold, "match threshold");
    seed_o = cmd->add_option("--seed", seed, "sampling seed");
    n_points_o = cmd->add_option("--n-points", n_points,
                                 "depth samples per query");
    min_depth_o = cmd->add_option("--min-depth", min_depth,
                                  "discard depths below this (meters)");
  }

  RunConfig resolve() const {
    std::map<std::string, std::string> file_values;
    if (!config_path.empty()) file_values = load_config_file(config_path);
    RunConfig cfg = resolve_config(file_values);
    const auto apply = [&cfg](CLI::Option* o, const std::string& key,
                              const std::string& value, auto setter) {
      if (o && o->count()) {
        setter();
        cfg.raw[key] = value;
      }
    };
    apply(root_o, "root", root, [&] { cfg.root = root; });
    apply(task_o, "task", task, [&] { cfg.task = task; });
    apply(estimator_o, "estimator", estimator,
          [&] { cfg.estimator = estimator; });
    apply(out_o, "out", out, [&] { cfg.out_path = out; });
    apply(catset_o, "category_set", category_set,
          [&] { cfg.category_set_path = category_set; });
    apply(threshold_o, "threshold", std::to_string(threshold),
          [&] { cfg.threshold = threshold; });
    apply(seed_o, "seed", std::to_string(seed),
          [&] { cfg.sampling.seed = seed; });
    apply(n_points_o, "n_points", std::to_string(n_points),
          [&] { cfg.sampling.n_points = n_points; });
    apply(min_depth_o, "min_depth", std::to_string(min_depth),
          [&] { cfg.sampling.min_depth = min_depth; });
    // The digest covers result-affecting keys; where inputs live and where
    // outputs land are location plumbing and would break run-to-run and
    // machine-to-machine comparability.
    cfg.raw.erase("root");
    cfg.raw.erase("out");
    cfg.validate();
    return cfg;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"auditable 2D-anchored 3D bounding box deduction toolkit"};
  app.require_subcommand(1);

  // ingest
  auto* ing = app.add_subcommand(
      "ingest", "convert a CSV + raster layout into scene bundles");
  std::string csv_dir, ingest_out;
  ing->add_option("--csv-dir", csv_dir, "directory with scenes.csv, "
                                        "instances.csv, expressions.csv")
      ->required();
  ing->add_option("--out", ingest_out, "bundle root to write")->required();

  // gen-traces
  auto* gen = app.add_subcommand("gen-traces",
                                 "build verifiable reasoning traces");
  CommonFlags gen_flags;
  gen_flags.attach(gen);

  // verify-traces
  auto* ver = app.add_subcommand("verify-traces",
                                 "re-derive and check reasoning traces");
  CommonFlags ver_flags;
  ver_flags.attach(ver);
  std::string traces_path;
  ver->add_option("--traces", traces_path, "trace JSONL file")->required();

  // serve-tools
  auto* srv = app.add_subcommand("serve-tools",
                                 "answer tool calls on stdio or TCP");
  CommonFlags srv_flags;
  srv_flags.attach(srv);
  std::string tcp_addr;
  srv->add_option("--tcp", tcp_addr, "bind address, e.g. 127.0.0.1:7070");

  // eval-detect
  auto* evd = app.add_subcommand("eval-detect",
                                 "score detection predictions against GT");
  CommonFlags evd_flags;
  evd_flags.attach(evd);
  std::string detect_pred;
  evd->add_option("--pred", detect_pred, "predictions JSONL")->required();

  // eval-ground
  auto* evg = app.add_subcommand("eval-ground",
                                 "score grounding predictions against GT");
  CommonFlags evg_flags;
  evg_flags.attach(evg);
  std::string ground_pred;
  evg->add_option("--pred", ground_pred, "predictions JSONL")->required();

  // sweep
  auto* swp = app.add_subcommand(
      "sweep", "rescale robustness sweep over factors 0.5 .. 1.5");
  CommonFlags swp_flags;
  swp_flags.attach(swp);
  bool frozen = false, as_table = false;
  swp->add_flag("--frozen", frozen, "pin unscaled intrinsics (ablation)");
  swp->add_flag("--table", as_table, "plain-text table instead of JSON");

  // iou
  auto* iou = app.add_subcommand("iou", "exact IoU of two 9-DoF boxes");
  std::string box_a, box_b, iou_mode = "full", iou_out;
  iou->add_option("--box-a", box_a, "cx,cy,cz,l,w,h,yaw,pitch,roll")
      ->required();
  iou->add_option("--box-b", box_b, "cx,cy,cz,l,w,h,yaw,pitch,roll")
      ->required();
  iou->add_option("--mode", iou_mode, "full | yaw_only")
      ->check(CLI::IsMember({"full", "yaw_only"}));
  iou->add_option("--out", iou_out, "output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(ing)) return cmd_ingest(csv_dir, ingest_out);
    if (app.got_subcommand(gen)) return cmd_gen_traces(gen_flags.resolve());
    if (app.got_subcommand(ver))
      return cmd_verify_traces(ver_flags.resolve(), traces_path);
    if (app.got_subcommand(srv))
      return cmd_serve_tools(srv_flags.resolve(), tcp_addr);
    if (app.got_subcommand(evd))
      return cmd_eval_detect(evd_flags.resolve(), detect_pred);
    if (app.got_subcommand(evg))
      return cmd_eval_ground(evg_flags.resolve(), ground_pred);
    if (app.got_subcommand(swp))
      return cmd_sweep(swp_flags.resolve(), frozen, as_table);
    if (app.got_subcommand(iou))
      return cmd_iou(box_a, box_b, iou_mode, iou_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::config ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
