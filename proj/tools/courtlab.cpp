// courtlab command line: calibration, ball lifting, trajectory fitting, mesh
// realignment, QA generation, evaluation and the annotation service.

#include "courtlab/annotation_store.hpp"
#include "courtlab/json_io.hpp"
#include "courtlab/service.hpp"
#include "courtlab/synthetic.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <sstream>

using namespace courtlab;

namespace {

Vec2 parse_pixel(const std::string& text, const std::string& flag) {
  std::stringstream ss(text);
  double u = 0, v = 0;
  char comma = 0;
  if (!(ss >> u >> comma >> v) || comma != ',' || !(ss >> std::ws).eof())
    throw FieldError(flag, "expected u,v");
  return {u, v};
}

std::string default_store() {
  if (const char* env = std::getenv("COURTLAB_STORE"); env && *env) return env;
  return "annotations";
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-")
    std::cout << text;
  else
    write_text_file(out_path, text);
}

struct Common {
  std::vector<std::string> court_configs;

  CourtRegistry registry() const {
    CourtRegistry r;
    for (const auto& p : court_configs) r.load(p);
    return r;
  }
};

struct CalibrateArgs {
  std::string store = default_store();
  std::string scene, frame, clicks_file, sport, out;
  int width = 0, height = 0;
  bool simplified = false;
  bool free_pp = false;
};

int run_calibrate(const Common& common, const CalibrateArgs& a) {
  const auto registry = common.registry();
  PnpOptions opt;
  opt.simplified = a.simplified;
  opt.fix_principal_point = !a.free_pp;

  std::optional<ClickList> clicks;
  Json clicks_doc;
  if (!a.clicks_file.empty()) {
    clicks_doc = read_json_file(a.clicks_file);
    clicks = read_clicks(field(clicks_doc, "clicks", a.clicks_file), "clicks");
  }

  if (a.scene.empty()) {
    // Standalone: {sport, image_width, image_height, clicks}.
    if (!clicks) throw FieldError("--clicks", "required without --scene");
    const Sport sport = parse_sport(read_string(field(clicks_doc, "sport", a.clicks_file), "sport"));
    const ImageSize size{read_int(field(clicks_doc, "image_width", a.clicks_file), "image_width"),
                         read_int(field(clicks_doc, "image_height", a.clicks_file), "image_height")};
    const auto& spec = registry.get(sport);
    if (clicks->size() < 4) throw FieldError("clicks", "calibration needs at least 4 keypoint clicks");
    const auto corr = make_correspondences(spec, *clicks);
    const auto result = solve_pnp(corr, size, opt);
    emit(a.out, dump_document(calibration_payload(spec, result)));
    std::cerr << "rmse_px " << result.report.rmse_px << "\n";
    return 0;
  }

  AnnotationStore store(a.store);
  if (!store.exists(a.scene)) {
    if (a.sport.empty() || a.width <= 0 || a.height <= 0)
      throw Error(ErrorCode::not_found,
                  "unknown scene " + a.scene + " (pass --sport and --image-size to create it)");
    store.write(a.scene, new_scene_document(a.scene, parse_sport(a.sport), {a.width, a.height}), 0);
  }
  const Json payload = calibrate_frame(store, registry, a.scene, a.frame, clicks, opt);
  if (!a.out.empty()) emit(a.out, dump_document(payload));
  std::cout << "rmse_px " << payload["calibration"]["rmse_px"].get<double>() << "\n";
  return 0;
}

struct LiftArgs {
  std::string store = default_store();
  std::string scene, frame, camera_file, sport, pixel, ground, out;
};

int run_lift(const Common& common, const LiftArgs& a) {
  const auto registry = common.registry();
  const Vec2 px = parse_pixel(a.pixel, "--pixel");
  const Vec2 ground = parse_pixel(a.ground, "--ground");
  if (!a.scene.empty()) {
    AnnotationStore store(a.store);
    emit(a.out, dump_document(lift_ball_frame(store, registry, a.scene, a.frame, px, ground)));
    return 0;
  }
  if (a.camera_file.empty() || a.sport.empty())
    throw FieldError("--camera", "pass --scene/--frame or --camera with --sport");
  const auto cam = camera_from_json(read_json_file(a.camera_file));
  const auto& spec = registry.get(parse_sport(a.sport));
  const auto lift = lift_ball(cam, px, ground, spec.surface_height_m);
  emit(a.out, dump_document(Json{{"point", to_json(lift.point)},
                                 {"lambda", lift.lambda},
                                 {"residual_m", lift.residual_m},
                                 {"inconsistent_click", lift.inconsistent_click},
                                 {"ground_point", to_json(lift.ground_point)}}));
  return 0;
}

int run_fit_trajectory(const std::string& samples_file, const std::string& out) {
  // {frame_rate, samples: [{t, point}], camera?, detections?: [{t, pixel}]}
  const Json j = read_json_file(samples_file);
  const double rate = read_number(field(j, "frame_rate", samples_file), "frame_rate");
  const auto& js = field(j, "samples", samples_file);
  if (!js.is_array()) throw FieldError("samples", "expected an array");
  std::vector<TrajectorySample> samples;
  for (std::size_t i = 0; i < js.size(); ++i) {
    const std::string p = "samples[" + std::to_string(i) + "]";
    samples.push_back({read_number(field(js[i], "t", p), p + ".t"), read_vec3(field(js[i], "point", p), p + ".point")});
  }
  const auto seg = fit_trajectory(samples, rate);
  Json result{{"segment", trajectory_to_json(seg)}};
  if (j.contains("camera") && j.contains("detections")) {
    const auto cam = camera_from_json(j["camera"]);
    std::vector<Detection> det;
    for (std::size_t i = 0; i < j["detections"].size(); ++i) {
      const auto& d = j["detections"][i];
      const std::string p = "detections[" + std::to_string(i) + "]";
      det.push_back({read_number(field(d, "t", p), p + ".t"), read_vec2(field(d, "pixel", p), p + ".pixel")});
    }
    const auto q = trajectory_quality(seg, det, cam);
    result["quality"] = Json{{"mean_error_px", q.mean_error_px}, {"errors_px", q.errors_px}, {"pass", q.pass}};
  }
  emit(out, dump_document(result));
  return 0;
}

struct RealignArgs {
  std::string camera_file, mesh_file, sport = "badminton", out;
  double height = 0.0;
  bool camera_frame = false;
};

int run_realign(const Common& common, const RealignArgs& a) {
  const auto registry = common.registry();
  const auto& spec = registry.get(parse_sport(a.sport));
  const auto cam = camera_from_json(read_json_file(a.camera_file));
  const Json m = read_json_file(a.mesh_file);
  PlayerMesh mesh;
  mesh.player_id = read_string(field(m, "player_id", a.mesh_file), "player_id");
  const auto& verts = field(m, "vertices", a.mesh_file);
  for (std::size_t i = 0; i < verts.size(); ++i)
    mesh.vertices.push_back(read_vec3(verts[i], "vertices[" + std::to_string(i) + "]"));
  for (const auto& [name, p] : field(m, "joints", a.mesh_file).items())
    mesh.joints[name] = read_vec3(p, "joints." + name);
  if (a.camera_frame) mesh = mesh_from_camera_frame(cam, mesh.player_id, mesh.vertices, mesh.joints);
  if (auto f = facing_from_joints(mesh.joints)) mesh.facing = *f;

  const auto r = realign_mesh(cam, mesh, spec.surface_height_m + a.height, spec.surface_height_m);
  Json joints = Json::object();
  for (const auto& [name, p] : r.mesh.joints) joints[name] = to_json(p);
  Json verts_out = Json::array();
  for (const auto& v : r.mesh.vertices) verts_out.push_back(to_json(v));
  emit(a.out, dump_document(Json{{"player_id", r.mesh.player_id},
                                 {"scale", r.scale},
                                 {"lowest_vertex", r.lowest_vertex},
                                 {"facing", to_json(r.mesh.facing)},
                                 {"joints", joints},
                                 {"vertices", verts_out}}));
  return 0;
}

struct GenArgs {
  std::string scenes_file, out, targets_file, templates_file, split = "bench";
  std::size_t synthetic = 0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::vector<std::string> sports;
};

int run_gen_qa(const Common& common, const GenArgs& a) {
  const auto registry = common.registry();
  std::vector<SceneState> scenes;
  GenerateOptions opt;
  opt.seed = a.seed;
  opt.split = a.split;
  opt.threads = std::max(1u, a.threads);
  if (!a.scenes_file.empty()) {
    for (const auto& j : read_jsonl(a.scenes_file)) scenes.push_back(scene_from_json(j));
    opt.split_rule = "scenes from " + std::filesystem::path(a.scenes_file).filename().string();
  } else {
    std::vector<Sport> sports(kBenchSports.begin(), kBenchSports.end());
    if (!a.sports.empty()) {
      sports.clear();
      for (const auto& s : a.sports) sports.push_back(parse_sport(s));
    }
    scenes = synthetic_pool(registry, sports, a.synthetic, a.seed);
    opt.split_rule = "synthetic pool, " + std::to_string(a.synthetic) + " scenes per sport";
  }

  const DistributionTargets targets =
      a.targets_file.empty() ? DistributionTargets::bench() : targets_from_json(read_json_file(a.targets_file));
  std::optional<TemplateManifest> custom;
  if (!a.templates_file.empty()) custom = parse_template_manifest(read_text_file(a.templates_file));
  const auto& manifest = custom ? *custom : default_template_manifest();

  const auto ds = generate_dataset(scenes, targets, opt, registry, manifest);
  write_qa_file(a.out, ds.items);
  write_text_file(a.out + ".manifest.json", dump_document(manifest_to_json(ds.manifest)));

  int target_total = targets.total();
  std::cout << "items " << ds.items.size() << " / target " << target_total << "\n";
  for (auto sub : kAllSubcategories)
    for (auto sport : kAllSports)
      if (int s = ds.manifest.shortfall(sub, sport); s > 0)
        std::cout << "shortfall " << to_string(sub) << " " << to_string(sport) << " " << s << "\n";
  return 0;
}

struct EvalArgs {
  std::string qa, pred, report;
  bool allow_missing = false;
};

int run_eval(const EvalArgs& a) {
  const auto items = read_qa_file(a.qa);
  const auto preds = read_predictions(a.pred);
  const auto report = aggregate(items, preds);
  if (report.missing > 0 && !a.allow_missing)
    throw Error(ErrorCode::missing_entity, std::to_string(report.missing) +
                                               " items have no prediction (use --allow-missing to score them 0)");
  std::cout << format_table(report);
  std::cout << "unparsed " << report.unparsed << ", missing " << report.missing << ", type mismatches "
            << report.type_mismatches << "\n";
  if (!a.report.empty()) write_text_file(a.report, dump_document(eval_report_to_json(report, items)));
  return 0;
}

struct ReportArgs {
  std::string qa, pred, out;
  std::vector<double> grid{10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
};

int run_report(const ReportArgs& a) {
  const auto items = read_qa_file(a.qa);
  const auto preds = read_predictions(a.pred);
  const auto report = aggregate(items, preds);
  const auto curve = ambiguity_curve(items, report, a.grid);
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << std::setw(8) << "top %" << std::setw(8) << "n" << std::setw(10) << "acc" << "\n";
  Json j = Json::array();
  for (const auto& p : curve) {
    os << std::setw(8) << p.percent << std::setw(8) << p.count << std::setw(10) << p.accuracy << "\n";
    j.push_back(Json{{"percent", p.percent}, {"count", p.count}, {"accuracy", p.accuracy}});
  }
  std::cout << os.str();
  if (!a.out.empty()) write_text_file(a.out, dump_document(Json{{"curve", j}}));
  return 0;
}

int run_validate(const std::string& engine_file, const std::string& oracle_file, const std::string& out) {
  std::vector<EngineRecord> engine, oracle;
  for (const auto& j : read_jsonl(engine_file)) engine.push_back(engine_record_from_json(j));
  for (const auto& j : read_jsonl(oracle_file))
    oracle.push_back(j.contains("views") ? oracle_record_from_json(j) : engine_record_from_json(j));
  const auto report = engine_error_report(engine, oracle);
  std::cout << format_error_report(report);
  if (!out.empty()) write_text_file(out, dump_document(error_report_to_json(report)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"courtlab: court geometry engine, QA generation and evaluation"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--court-config", common.court_configs, "Court layout override file (repeatable)")
      ->check(CLI::ExistingFile);

  CalibrateArgs cal;
  auto* c = app.add_subcommand("calibrate", "Solve a frame camera from court keypoint clicks");
  c->add_option("--store", cal.store, "Annotation store root (env COURTLAB_STORE)");
  c->add_option("--scene", cal.scene, "Scene id in the store");
  c->add_option("--frame", cal.frame, "Frame id in the scene");
  c->add_option("--clicks", cal.clicks_file,
                "Click file {clicks: {name: [u, v]}}; standalone mode also needs sport, image_width, image_height")
      ->check(CLI::ExistingFile);
  c->add_option("--sport", cal.sport, "Sport, used when creating a new scene");
  c->add_option("--image-width", cal.width, "Image width, used when creating a new scene");
  c->add_option("--image-height", cal.height, "Image height, used when creating a new scene");
  c->add_flag("--simplified", cal.simplified, "fx = fy and principal point at the image center");
  c->add_flag("--free-principal-point", cal.free_pp, "Refine (cx, cy) in full mode");
  c->add_option("--out", cal.out, "Write the calibration payload here");

  LiftArgs lift;
  auto* l = app.add_subcommand("lift-ball", "Recover the 3D ball from its pixel and ground click");
  l->add_option("--store", lift.store, "Annotation store root (env COURTLAB_STORE)");
  l->add_option("--scene", lift.scene, "Scene id; uses and updates the stored frame");
  l->add_option("--frame", lift.frame, "Frame id");
  l->add_option("--camera", lift.camera_file, "Camera file for standalone use")->check(CLI::ExistingFile);
  l->add_option("--sport", lift.sport, "Sport for standalone use");
  l->add_option("--pixel", lift.pixel, "Ball pixel u,v")->required();
  l->add_option("--ground", lift.ground, "Ground contact pixel u,v")->required();
  l->add_option("--out", lift.out, "Output file (default stdout)");

  std::string traj_samples, traj_out;
  auto* t = app.add_subcommand("fit-trajectory", "Fit a constant-acceleration ball flight");
  t->add_option("--samples", traj_samples, "Sample file {frame_rate, samples, camera?, detections?}")
      ->required()
      ->check(CLI::ExistingFile);
  t->add_option("--out", traj_out, "Output file (default stdout)");

  RealignArgs re;
  auto* r = app.add_subcommand("realign", "Move a recovered mesh onto an annotated contact height");
  r->add_option("--camera", re.camera_file, "Scene camera file")->required()->check(CLI::ExistingFile);
  r->add_option("--mesh", re.mesh_file, "Mesh file {player_id, vertices, joints}")->required()->check(CLI::ExistingFile);
  r->add_option("--height", re.height, "Lowest-vertex height above the playing surface (m)")->required();
  r->add_option("--sport", re.sport, "Sport (sets the playing surface height)");
  r->add_flag("--camera-frame", re.camera_frame, "Mesh coordinates are in the camera frame");
  r->add_option("--out", re.out, "Output file (default stdout)");

  GenArgs gen;
  auto* g = app.add_subcommand("gen-qa", "Generate a QA dataset and its manifest");
  auto* g_scenes = g->add_option("--scenes", gen.scenes_file, "Scene states, one JSON object per line")
                       ->check(CLI::ExistingFile);
  auto* g_syn = g->add_option("--synthetic", gen.synthetic, "Synthetic scenes per sport instead of --scenes");
  g_scenes->excludes(g_syn);
  g->add_option("--sports", gen.sports, "Sports for the synthetic pool (default: bench sports)");
  g->add_option("--seed", gen.seed, "Global seed")->required();
  g->add_option("--out", gen.out, "QA output file; the manifest goes to <out>.manifest.json")->required();
  g->add_option("--targets", gen.targets_file, "Targets {subcategory: {sport: count}} (default: bench)")
      ->check(CLI::ExistingFile);
  g->add_option("--templates", gen.templates_file, "Template manifest (default: built-in)")
      ->check(CLI::ExistingFile);
  g->add_option("--split", gen.split, "Split name used in item ids");
  g->add_option("--threads", gen.threads, "Worker threads (output does not depend on it)");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score predictions against a QA file");
  e->add_option("--qa", ev.qa, "QA file")->required()->check(CLI::ExistingFile);
  e->add_option("--pred", ev.pred, "Predictions, one {item_id, raw_text} per line")->required()->check(CLI::ExistingFile);
  e->add_option("--report", ev.report, "Machine-readable report output");
  e->add_flag("--allow-missing", ev.allow_missing, "Score items without a prediction as 0");

  ReportArgs rep;
  auto* rp = app.add_subcommand("report", "Accuracy over the most perspective-ambiguous items");
  rp->add_option("--qa", rep.qa, "QA file")->required()->check(CLI::ExistingFile);
  rp->add_option("--pred", rep.pred, "Predictions file")->required()->check(CLI::ExistingFile);
  rp->add_option("--grid", rep.grid, "Top-k percentages")->delimiter(',');
  rp->add_option("--out", rep.out, "Machine-readable curve output");

  std::string val_engine, val_oracle, val_out;
  auto* v = app.add_subcommand("validate", "Engine error statistics against an oracle");
  v->add_option("--engine", val_engine, "Engine records, one per line")->required()->check(CLI::ExistingFile);
  v->add_option("--oracle", val_oracle, "Oracle records (direct or multi-view), one per line")
      ->required()
      ->check(CLI::ExistingFile);
  v->add_option("--report", val_out, "Machine-readable report output");

  std::string srv_store = default_store(), srv_images = "images", srv_host = "127.0.0.1";
  int srv_port = 8080;
  auto* s = app.add_subcommand("serve", "Run the annotation HTTP service");
  s->add_option("--store", srv_store, "Annotation store root (env COURTLAB_STORE)");
  s->add_option("--images", srv_images, "Image root: <images>/<scene>/<frame>.jpg");
  s->add_option("--host", srv_host, "Listen address");
  s->add_option("--port", srv_port, "Listen port");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return 2;
  }

  try {
    if (c->parsed()) {
      if (!cal.scene.empty() && cal.frame.empty()) throw FieldError("--frame", "required with --scene");
      return run_calibrate(common, cal);
    }
    if (l->parsed()) return run_lift(common, lift);
    if (t->parsed()) return run_fit_trajectory(traj_samples, traj_out);
    if (r->parsed()) return run_realign(common, re);
    if (g->parsed()) {
      if (gen.scenes_file.empty() && gen.synthetic == 0)
        throw FieldError("--scenes", "pass --scenes or --synthetic");
      return run_gen_qa(common, gen);
    }
    if (e->parsed()) return run_eval(ev);
    if (rp->parsed()) return run_report(rep);
    if (v->parsed()) return run_validate(val_engine, val_oracle, val_out);
    if (s->parsed()) {
      AnnotationStore store(srv_store);
      Service service(store, srv_images, common.registry());
      std::cerr << "listening on " << srv_host << ":" << srv_port << "\n";
      service.serve(srv_host, srv_port);
      return 0;
    }
  } catch (const Error& ex) {
    std::cerr << "error (" << to_string(ex.code()) << "): " << ex.what() << "\n";
    return 1;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 2;
}
