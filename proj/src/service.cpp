#include "courtlab/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <sstream>

namespace courtlab {

namespace fs = std::filesystem;

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::not_found: return 404;
    case ErrorCode::conflict: return 409;
    case ErrorCode::calibration_failed: return 422;
    case ErrorCode::io_error: return 500;
    default: return 400;
  }
}

HttpResponse error_response(const Error& e) {
  Json body{{"error", std::string(to_string(e.code()))}, {"message", e.what()}, {"field", nullptr}};
  if (const auto* fe = dynamic_cast<const FieldError*>(&e)) body["field"] = fe->field();
  if (const auto* ce = dynamic_cast<const CalibrationError*>(&e)) {
    body["camera"] = camera_to_json(ce->result().camera);
    body["calibration"] = fit_report_to_json(ce->result().report);
  }
  return {http_status(e.code()), dump_document(body), "application/json"};
}

ClickList read_clicks(const Json& j, const std::string& path) {
  if (!j.is_object()) throw FieldError(path, "expected an object of keypoint name -> [u, v]");
  ClickList out;
  for (const auto& [name, px] : j.items()) out.emplace_back(name, read_vec2(px, path + "." + name));
  // Corners first in the fixed click order, then the rest by name.
  auto rank = [](const std::string& n) {
    for (std::size_t i = 0; i < kCornerNames.size(); ++i)
      if (n == kCornerNames[i]) return static_cast<int>(i);
    return static_cast<int>(kCornerNames.size());
  };
  std::stable_sort(out.begin(), out.end(),
                   [&](const auto& a, const auto& b) { return rank(a.first) < rank(b.first); });
  return out;
}

Json clicks_to_json(const ClickList& clicks) {
  Json j = Json::object();
  for (const auto& [name, px] : clicks) j[name] = to_json(px);
  return j;
}

namespace {

Json project_json(const PinholeCamera& cam, const Vec3& p) {
  const auto pr = project(cam, p);
  if (pr.behind) return nullptr;
  return to_json(pr.pixel);
}

Json parse_body(const std::string& body) {
  try {
    return Json::parse(body);
  } catch (const Json::parse_error& e) {
    throw FieldError("body", std::string("malformed JSON: ") + e.what());
  }
}

int optional_base_version(const Json& req) {
  if (!req.contains("base_version") || req["base_version"].is_null()) return -1;
  return read_int(req["base_version"], "base_version");
}

struct SceneInfo {
  Sport sport;
  ImageSize image_size;
};

SceneInfo scene_info(const Json& doc) {
  const auto& scene = field(doc, "scene", "document");
  SceneInfo info;
  info.sport = parse_sport(read_string(field(scene, "sport", "document.scene"), "document.scene.sport"));
  info.image_size.width = read_int(field(scene, "image_width", "document.scene"), "document.scene.image_width");
  info.image_size.height = read_int(field(scene, "image_height", "document.scene"), "document.scene.image_height");
  return info;
}

const Json& frame_entry(const Json& doc, const std::string& frame_id) {
  if (!doc.contains("frames") || !doc["frames"].contains(frame_id))
    throw Error(ErrorCode::not_found, "unknown frame " + frame_id);
  return doc["frames"][frame_id];
}

PinholeCamera frame_camera(const Json& doc, const std::string& frame_id) {
  const auto& frame = frame_entry(doc, frame_id);
  if (!frame.contains("camera") || frame["camera"].is_null())
    throw FieldError("camera", "frame " + frame_id + " is not calibrated");
  return camera_from_json(frame["camera"], "frames." + frame_id + ".camera");
}

const std::array<const char*, 3> kImageExtensions = {".jpg", ".jpeg", ".png"};

bool safe_component(const std::string& s) {
  try {
    AnnotationStore::check_scene_id(s);
    return true;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace

Json calibration_payload(const CourtSpec& spec, const CalibrationResult& result) {
  const auto& cam = result.camera;
  Json box = Json::array();
  for (auto name : kCornerNames) box.push_back(project_json(cam, spec.keypoints.at(std::string(name))));
  box.push_back(box.front());
  Json lines = Json::object();
  const double z = spec.surface_height_m;
  for (const auto& l : spec.lines)
    lines[l.name] = Json::array({project_json(cam, Vec3(l.segment.a.x(), l.segment.a.y(), z)),
                                 project_json(cam, Vec3(l.segment.b.x(), l.segment.b.y(), z))});
  return Json{{"camera", camera_to_json(cam)},
              {"calibration", fit_report_to_json(result.report)},
              {"court_box", box},
              {"lines", lines}};
}

Json calibrate_frame(AnnotationStore& store, const CourtRegistry& registry,
                     const std::string& scene_id, const std::string& frame_id,
                     const std::optional<ClickList>& clicks, const PnpOptions& options,
                     int base_version) {
  const Json doc = store.read(scene_id);
  const auto info = scene_info(doc);
  const auto& spec = registry.get(info.sport);

  ClickList use;
  if (clicks) {
    use = *clicks;
  } else {
    const auto& frame = frame_entry(doc, frame_id);
    if (!frame.contains("court_clicks"))
      throw FieldError("clicks", "frame " + frame_id + " has no stored court clicks");
    use = read_clicks(frame["court_clicks"], "frames." + frame_id + ".court_clicks");
  }
  if (use.size() < 4)
    throw FieldError("clicks", "calibration needs at least 4 keypoint clicks, got " + std::to_string(use.size()));

  std::vector<Correspondence> corr;
  try {
    corr = make_correspondences(spec, use);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::not_found) throw FieldError("clicks", e.what());
    throw;
  }
  const auto result = solve_pnp(corr, info.image_size, options);
  Json payload = calibration_payload(spec, result);

  const int version = store.update(
      scene_id,
      [&](Json& d) {
        auto& f = d["frames"][frame_id];
        f["court_clicks"] = clicks_to_json(use);
        f["camera"] = payload["camera"];
        Json cal = payload["calibration"];
        cal["simplified"] = options.simplified;
        cal["fix_principal_point"] = options.fix_principal_point;
        f["calibration"] = cal;
      },
      base_version);
  payload["version"] = version;
  return payload;
}

Json lift_ball_frame(AnnotationStore& store, const CourtRegistry& registry,
                     const std::string& scene_id, const std::string& frame_id, const Vec2& pixel,
                     const Vec2& ground_click, int base_version) {
  const Json doc = store.read(scene_id);
  const auto& spec = registry.get(scene_info(doc).sport);
  const auto cam = frame_camera(doc, frame_id);
  const auto lift = lift_ball(cam, pixel, ground_click, spec.surface_height_m);

  Json out{{"point", to_json(lift.point)},
           {"lambda", lift.lambda},
           {"residual_m", lift.residual_m},
           {"inconsistent_click", lift.inconsistent_click},
           {"ground_point", to_json(lift.ground_point)},
           {"reprojected", project_json(cam, lift.point)},
           {"ground_reprojected",
            project_json(cam, Vec3(lift.point.x(), lift.point.y(), spec.surface_height_m))}};
  const int version = store.update(
      scene_id,
      [&](Json& d) {
        d["frames"][frame_id]["ball"] = Json{{"pixel", to_json(pixel)},
                                             {"ground_click", to_json(ground_click)},
                                             {"position", out["point"]},
                                             {"residual_m", lift.residual_m},
                                             {"inconsistent_click", lift.inconsistent_click}};
      },
      base_version);
  out["version"] = version;
  return out;
}

Service::Service(AnnotationStore& store, fs::path image_root, CourtRegistry registry)
    : store_(store), image_root_(std::move(image_root)), registry_(std::move(registry)) {}

HttpResponse Service::handle(const std::string& method, const std::string& path,
                             const std::string& body) {
  std::vector<std::string> parts;
  std::stringstream ss(path.substr(0, path.find('?')));
  for (std::string p; std::getline(ss, p, '/');)
    if (!p.empty()) parts.push_back(p);
  try {
    return route(method, parts, body);
  } catch (const Error& e) {
    return error_response(e);
  } catch (const std::exception& e) {
    return error_response(Error(ErrorCode::invalid_argument, e.what()));
  }
}

HttpResponse Service::route(const std::string& method, const std::vector<std::string>& parts,
                            const std::string& body) {
  auto ok = [](const Json& j) { return HttpResponse{200, dump_document(j), "application/json"}; };
  const std::size_t n = parts.size();
  if (n < 2 || parts[0] != "api" || parts[1] != "scenes")
    throw Error(ErrorCode::not_found, "no such endpoint");

  if (n == 2 && method == "GET") return ok(Json{{"scenes", store_.list_scenes()}});
  if (n < 4) throw Error(ErrorCode::not_found, "no such endpoint");

  const std::string& scene = parts[2];
  AnnotationStore::check_scene_id(scene);
  const std::string& leaf = parts[3];

  if (n == 4 && leaf == "frames" && method == "GET") return ok(list_frames(scene));
  if (n == 4 && leaf == "document" && method == "GET")
    return {200, store_.read_text(scene), "application/json"};
  if (n == 4 && leaf == "document" && method == "PUT") return ok(put_document(scene, parse_body(body)));
  if (n == 4 && leaf == "trajectory" && method == "POST") return ok(trajectory(scene, parse_body(body)));

  if (n == 6 && leaf == "frames") {
    const std::string& frame = parts[4];
    if (!safe_component(frame)) throw FieldError("frame_id", "invalid frame id '" + frame + "'");
    const std::string& action = parts[5];
    if (action == "image" && method == "GET") return frame_image(scene, frame);
    if (method == "POST") {
      const Json req = parse_body(body);
      if (action == "court") {
        PnpOptions opt;
        if (req.contains("simplified")) {
          if (!req["simplified"].is_boolean()) throw FieldError("simplified", "expected true or false");
          opt.simplified = req["simplified"].get<bool>();
        }
        const Json doc = store_.read(scene);
        if (!doc["frames"].contains(frame)) frame_image(scene, frame);  // 404 for unknown frames
        return ok(calibrate_frame(store_, registry_, scene, frame,
                                  read_clicks(field(req, "clicks", "body"), "clicks"), opt,
                                  optional_base_version(req)));
      }
      if (action == "ball_line") return ok(ball_line(scene, frame, req));
      if (action == "ball") return ok(ball(scene, frame, req));
      if (action == "player_height") return ok(player_height(scene, frame, req));
    }
  }
  throw Error(ErrorCode::not_found, "no such endpoint");
}

Json Service::list_frames(const std::string& scene_id) const {
  const Json doc = store_.read(scene_id);
  std::set<std::string> ids;
  if (doc.contains("frames"))
    for (const auto& [fid, _] : doc["frames"].items()) ids.insert(fid);
  const fs::path dir = image_root_ / scene_id;
  std::error_code ec;
  if (fs::is_directory(dir, ec))
    for (const auto& e : fs::directory_iterator(dir)) {
      const auto ext = e.path().extension().string();
      if (std::find(kImageExtensions.begin(), kImageExtensions.end(), ext) != kImageExtensions.end())
        ids.insert(e.path().stem().string());
    }
  Json frames = Json::array();
  for (const auto& id : ids) {
    Json f{{"frame_id", id}, {"calibrated", false}, {"has_ball", false}};
    if (doc.contains("frames") && doc["frames"].contains(id)) {
      const auto& e = doc["frames"][id];
      f["calibrated"] = e.contains("camera") && !e["camera"].is_null();
      f["has_ball"] = e.contains("ball") && !e["ball"].is_null();
    }
    frames.push_back(f);
  }
  return Json{{"scene_id", scene_id}, {"frames", frames}};
}

HttpResponse Service::frame_image(const std::string& scene_id, const std::string& frame_id) const {
  for (const char* ext : kImageExtensions) {
    const fs::path p = image_root_ / scene_id / (frame_id + ext);
    if (!fs::is_regular_file(p)) continue;
    const std::string type = std::string(ext) == ".png" ? "image/png" : "image/jpeg";
    return {200, read_text_file(p), type};
  }
  throw Error(ErrorCode::not_found, "no image for frame " + frame_id);
}

Json Service::put_document(const std::string& scene_id, const Json& req) {
  const int base = read_int(field(req, "base_version", "body"), "base_version");
  Json doc = field(req, "document", "body");
  check_document(doc, registry_);
  const auto& scene = doc["scene"];
  if (scene.contains("scene_id") && scene["scene_id"] != scene_id)
    throw FieldError("document.scene.scene_id", "does not match the request path");
  const int version = store_.write(scene_id, std::move(doc), base);
  return Json{{"version", version}};
}

Json Service::ball_line(const std::string& scene_id, const std::string& frame_id, const Json& req) const {
  const Json doc = store_.read(scene_id);
  const auto& spec = registry_.get(scene_info(doc).sport);
  const auto cam = frame_camera(doc, frame_id);
  const Vec2 px = read_vec2(field(req, "pixel", "body"), "pixel");
  const auto line = assistive_line(cam, px, spec.surface_height_m);
  return Json{{"segment", Json::array({to_json(line.segment.a), to_json(line.segment.b)})},
              {"degenerate", line.segment.degenerate},
              {"lambda_min", line.lambda_min},
              {"lambda_max", line.lambda_max},
              {"visible", line.visible}};
}

Json Service::ball(const std::string& scene_id, const std::string& frame_id, const Json& req) {
  const Vec2 px = read_vec2(field(req, "pixel", "body"), "pixel");
  const Vec2 ground = read_vec2(field(req, "ground_click", "body"), "ground_click");
  return lift_ball_frame(store_, registry_, scene_id, frame_id, px, ground, optional_base_version(req));
}

Json Service::player_height(const std::string& scene_id, const std::string& frame_id, const Json& req) {
  const Json doc = store_.read(scene_id);
  const auto& spec = registry_.get(scene_info(doc).sport);
  const auto cam = frame_camera(doc, frame_id);

  PlayerMesh mesh;
  mesh.player_id = read_string(field(req, "player_id", "body"), "player_id");
  const double height = read_number(field(req, "annotated_height", "body"), "annotated_height");
  const auto& verts = field(req, "vertices", "body");
  if (!verts.is_array() || verts.empty()) throw FieldError("vertices", "expected a non-empty array");
  for (std::size_t i = 0; i < verts.size(); ++i)
    mesh.vertices.push_back(read_vec3(verts[i], "vertices[" + std::to_string(i) + "]"));
  const auto& joints = field(req, "joints", "body");
  if (!joints.is_object()) throw FieldError("joints", "expected an object");
  for (const auto& [name, p] : joints.items()) mesh.joints[name] = read_vec3(p, "joints." + name);
  if (!mesh.joints.count("pelvis")) throw FieldError("joints.pelvis", "pelvis joint is required");
  if (req.value("frame", std::string("world")) == "camera")
    mesh = mesh_from_camera_frame(cam, mesh.player_id, mesh.vertices, mesh.joints);

  const auto r = realign_mesh(cam, mesh, spec.surface_height_m + height, spec.surface_height_m);
  const Vec3 lowest = r.mesh.vertices[r.lowest_vertex];
  Json out{{"player_id", mesh.player_id},
           {"scale", r.scale},
           {"lowest_vertex", r.lowest_vertex},
           {"lowest_point", to_json(lowest)},
           {"pelvis", to_json(r.mesh.joints.at("pelvis"))},
           {"facing", to_json(r.mesh.facing)}};
  const int version = store_.update(
      scene_id,
      [&](Json& d) {
        Json entry = out;
        entry["annotated_height"] = height;
        entry.erase("player_id");
        d["frames"][frame_id]["players"][mesh.player_id] = entry;
      },
      optional_base_version(req));
  out["version"] = version;
  return out;
}

Json Service::trajectory(const std::string& scene_id, const Json& req) {
  const Json doc = store_.read(scene_id);
  const double rate = read_number(field(req, "frame_rate", "body"), "frame_rate");
  if (!(rate > 0)) throw FieldError("frame_rate", "must be positive");
  const auto& js = field(req, "samples", "body");
  if (!js.is_array() || js.size() != 3) throw FieldError("samples", "expected start, middle and end samples");
  std::vector<TrajectorySample> samples;
  for (std::size_t i = 0; i < js.size(); ++i) {
    const std::string p = "samples[" + std::to_string(i) + "]";
    samples.push_back({read_number(field(js[i], "t", p), p + ".t"), read_vec3(field(js[i], "point", p), p + ".point")});
  }
  const std::string cam_frame = read_string(field(req, "camera_frame", "body"), "camera_frame");
  const auto cam = frame_camera(doc, cam_frame);
  const auto seg = fit_trajectory(samples, rate);

  Json reproj = Json::array();
  const auto steps = static_cast<long long>(std::floor((seg.t_end - seg.t0) * rate + 1e-9));
  for (long long k = 0; k <= steps; ++k) {
    const double t = seg.t0 + static_cast<double>(k) / rate;
    const Vec3 p = seg.at(t);
    reproj.push_back(Json{{"t", t}, {"point", to_json(p)}, {"pixel", project_json(cam, p)}});
  }
  Json out{{"segment", trajectory_to_json(seg)}, {"reprojections", reproj}};

  if (req.contains("detections")) {
    const auto& jd = req["detections"];
    if (!jd.is_array()) throw FieldError("detections", "expected an array");
    std::vector<Detection> det;
    for (std::size_t i = 0; i < jd.size(); ++i) {
      const std::string p = "detections[" + std::to_string(i) + "]";
      det.push_back({read_number(field(jd[i], "t", p), p + ".t"), read_vec2(field(jd[i], "pixel", p), p + ".pixel")});
    }
    if (!det.empty()) {
      const auto q = trajectory_quality(seg, det, cam);
      out["quality"] = Json{{"mean_error_px", q.mean_error_px}, {"errors_px", q.errors_px}, {"pass", q.pass}};
    }
  }
  const int version = store_.update(
      scene_id,
      [&](Json& d) {
        Json entry{{"camera_frame", cam_frame}, {"samples", js}, {"segment", out["segment"]}};
        if (!d.contains("trajectories") || !d["trajectories"].is_array()) d["trajectories"] = Json::array();
        d["trajectories"].push_back(entry);
      },
      optional_base_version(req));
  out["version"] = version;
  return out;
}

void Service::serve(const std::string& host, int port, const std::function<void(int)>& on_listening) {
  httplib::Server server;
  auto bind = [this](const std::string& method) {
    return [this, method](const httplib::Request& req, httplib::Response& res) {
      const auto r = handle(method, req.path, req.body);
      res.status = r.status;
      res.set_content(r.body, r.content_type);
    };
  };
  server.Get(R"(/api/.*)", bind("GET"));
  server.Put(R"(/api/.*)", bind("PUT"));
  server.Post(R"(/api/.*)", bind("POST"));
  const int bound = port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::io_error, "cannot listen on " + host + ":" + std::to_string(port));
  server_ = &server;
  if (on_listening) on_listening(bound);
  const bool ok = server.listen_after_bind();
  server_ = nullptr;
  if (!ok) throw Error(ErrorCode::io_error, "server on " + host + ":" + std::to_string(bound) + " failed");
}

void Service::stop() {
  if (auto* s = server_.load()) s->stop();
}

}  // namespace courtlab
