#include "courtlab/json_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace courtlab {

const Json& field(const Json& obj, const std::string& key, const std::string& path) {
  const std::string where = path.empty() ? key : path + "." + key;
  if (!obj.is_object()) throw FieldError(path.empty() ? "$" : path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw FieldError(where, "missing");
  return *it;
}

double read_number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw FieldError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw FieldError(path, "not finite");
  return v;
}

int read_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw FieldError(path, "expected an integer");
  return j.get<int>();
}

std::string read_string(const Json& j, const std::string& path) {
  if (!j.is_string()) throw FieldError(path, "expected a string");
  return j.get<std::string>();
}

Vec2 read_vec2(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) throw FieldError(path, "expected [x, y]");
  return {read_number(j[0], path + "[0]"), read_number(j[1], path + "[1]")};
}

Vec3 read_vec3(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) throw FieldError(path, "expected [x, y, z]");
  return {read_number(j[0], path + "[0]"), read_number(j[1], path + "[1]"),
          read_number(j[2], path + "[2]")};
}

Json to_json(const Vec2& v) { return Json::array({v.x(), v.y()}); }
Json to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

namespace {

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double number_or_inf(const Json& j, const std::string& path) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : read_number(j, path);
}

}  // namespace

Json camera_to_json(const PinholeCamera& c) {
  Json r = Json::array();
  for (int i = 0; i < 3; ++i) r.push_back(Json::array({c.rotation(i, 0), c.rotation(i, 1), c.rotation(i, 2)}));
  return Json{{"fx", c.fx},
              {"fy", c.fy},
              {"cx", c.cx},
              {"cy", c.cy},
              {"rotation", r},
              {"translation", to_json(c.translation)},
              {"image_width", c.image_size.width},
              {"image_height", c.image_size.height}};
}

PinholeCamera camera_from_json(const Json& j, const std::string& path) {
  PinholeCamera c;
  c.fx = read_number(field(j, "fx", path), path + ".fx");
  c.fy = read_number(field(j, "fy", path), path + ".fy");
  c.cx = read_number(field(j, "cx", path), path + ".cx");
  c.cy = read_number(field(j, "cy", path), path + ".cy");
  const auto& r = field(j, "rotation", path);
  if (!r.is_array() || r.size() != 3) throw FieldError(path + ".rotation", "expected 3 rows");
  for (int i = 0; i < 3; ++i) c.rotation.row(i) = read_vec3(r[i], path + ".rotation[" + std::to_string(i) + "]").transpose();
  c.translation = read_vec3(field(j, "translation", path), path + ".translation");
  c.image_size.width = read_int(field(j, "image_width", path), path + ".image_width");
  c.image_size.height = read_int(field(j, "image_height", path), path + ".image_height");
  if (c.fx <= 0 || c.fy <= 0) throw FieldError(path + ".fx", "focal lengths must be positive");
  const Mat3 should_be_i = c.rotation * c.rotation.transpose();
  if ((should_be_i - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9 || c.rotation.determinant() < 0)
    throw FieldError(path + ".rotation", "not a proper rotation");
  return c;
}

Json fit_report_to_json(const FitReport& r) {
  return Json{{"rmse_px", r.rmse_px},
              {"residuals_px", r.residuals_px},
              {"iterations", r.iterations},
              {"converged", r.converged},
              {"initial_focal_px", r.initial_focal_px}};
}

Json trajectory_to_json(const TrajectorySegment& s) {
  return Json{{"t0", s.t0},
              {"t_end", s.t_end},
              {"p0", to_json(s.p0)},
              {"v0", to_json(s.v0)},
              {"acceleration", to_json(s.acceleration)},
              {"frame_rate", s.frame_rate}};
}

TrajectorySegment trajectory_from_json(const Json& j, const std::string& path) {
  TrajectorySegment s;
  s.t0 = read_number(field(j, "t0", path), path + ".t0");
  s.t_end = read_number(field(j, "t_end", path), path + ".t_end");
  s.p0 = read_vec3(field(j, "p0", path), path + ".p0");
  s.v0 = read_vec3(field(j, "v0", path), path + ".v0");
  s.acceleration = read_vec3(field(j, "acceleration", path), path + ".acceleration");
  s.frame_rate = read_number(field(j, "frame_rate", path), path + ".frame_rate");
  return s;
}

Json scene_to_json(const SceneState& s) {
  Json players = Json::array();
  for (const auto& p : s.players) {
    Json joints = Json::object();
    for (const auto& [name, q] : p.joints) joints[name] = to_json(q);
    players.push_back(Json{{"player_id", p.player_id},
                           {"label", p.label},
                           {"bbox", Json::array({p.bbox.x0, p.bbox.y0, p.bbox.x1, p.bbox.y1})},
                           {"pelvis", to_json(p.pelvis)},
                           {"facing", to_json(p.facing)},
                           {"joints", joints},
                           {"lowest_point", to_json(p.lowest_point)}});
  }
  Json ball = nullptr;
  if (s.ball)
    ball = Json{{"position", s.ball->position ? to_json(*s.ball->position) : Json(nullptr)},
                {"visible", s.ball->visible}};
  return Json{{"scene_id", s.scene_id},
              {"frame_id", s.frame_id},
              {"sport", std::string(to_string(s.sport))},
              {"camera", camera_to_json(s.camera)},
              {"ball", ball},
              {"players", players}};
}

SceneState scene_from_json(const Json& j) {
  SceneState s;
  s.scene_id = read_string(field(j, "scene_id", ""), "scene_id");
  s.frame_id = read_string(field(j, "frame_id", ""), "frame_id");
  s.sport = parse_sport(read_string(field(j, "sport", ""), "sport"));
  s.camera = camera_from_json(field(j, "camera", ""), "camera");
  if (j.contains("ball") && !j["ball"].is_null()) {
    const auto& b = j["ball"];
    BallState ball;
    if (b.contains("position") && !b["position"].is_null())
      ball.position = read_vec3(b["position"], "ball.position");
    ball.visible = b.value("visible", false);
    s.ball = ball;
  }
  bool labelled = true;
  if (j.contains("players")) {
    const auto& ps = j["players"];
    if (!ps.is_array()) throw FieldError("players", "expected an array");
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const std::string path = "players[" + std::to_string(i) + "]";
      const auto& pj = ps[i];
      PlayerState p;
      p.player_id = read_string(field(pj, "player_id", path), path + ".player_id");
      if (pj.contains("label")) p.label = read_int(pj["label"], path + ".label");
      else labelled = false;
      if (pj.contains("bbox")) {
        const auto& b = pj["bbox"];
        if (!b.is_array() || b.size() != 4) throw FieldError(path + ".bbox", "expected [x0, y0, x1, y1]");
        p.bbox = {read_number(b[0], path + ".bbox"), read_number(b[1], path + ".bbox"),
                  read_number(b[2], path + ".bbox"), read_number(b[3], path + ".bbox")};
      }
      p.pelvis = read_vec3(field(pj, "pelvis", path), path + ".pelvis");
      if (pj.contains("facing")) p.facing = read_vec2(pj["facing"], path + ".facing");
      if (pj.contains("joints"))
        for (const auto& [name, q] : pj["joints"].items())
          p.joints[name] = read_vec3(q, path + ".joints." + name);
      p.lowest_point = pj.contains("lowest_point") ? read_vec3(pj["lowest_point"], path + ".lowest_point")
                                                   : p.pelvis;
      const double n = p.facing.norm();
      if (!(n > 0)) throw FieldError(path + ".facing", "zero vector");
      p.facing /= n;
      s.players.push_back(std::move(p));
    }
  }
  if (!labelled) assign_player_labels(s);
  check_scene(s);
  return s;
}

namespace {

Json ground_truth_to_json(const GroundTruth& g) {
  return std::visit(
      [](const auto& v) -> Json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Vec3>) return to_json(v);
        else return Json(v);
      },
      g);
}

GroundTruth ground_truth_from_json(const Json& j, AnswerType t) {
  switch (t) {
    case AnswerType::float_meters: return read_number(j, "ground_truth");
    case AnswerType::coordinate_3d: return read_vec3(j, "ground_truth");
    case AnswerType::integer:
      if (!j.is_number_integer()) throw FieldError("ground_truth", "expected an integer");
      return j.get<long long>();
    case AnswerType::mcq: return read_string(j, "ground_truth");
  }
  throw FieldError("answer_type", "unknown");
}

}  // namespace

Json qa_item_to_json(const QAItem& item) {
  Json options = Json::array();
  Json option_keys = Json::array();
  for (const auto& o : item.options) {
    options.push_back(Json{{"letter", o.letter}, {"text", o.text}});
    option_keys.push_back(o.key);
  }
  const auto& m = item.meta;
  Json distances = Json::array();
  for (const auto& [name, v] : m.distances) distances.push_back(Json::array({name, finite_or_null(v)}));
  Json meta{{"template_id", m.template_id},
            {"rng_seed", m.rng_seed},
            {"question_type", std::string(to_string(m.question_type))},
            {"entities", m.entities},
            {"line", m.line},
            {"answer_key", m.answer_key},
            {"option_keys", option_keys},
            {"margin", finite_or_null(m.margin)},
            {"distances", distances},
            {"ratio_3d_2d", m.ratio_3d_2d ? finite_or_null(*m.ratio_3d_2d) : Json(nullptr)},
            {"player_labels", m.player_labels},
            {"flags", m.flags}};
  return Json{{"id", item.id},
              {"scene_id", item.scene_id},
              {"frame_id", item.frame_id},
              {"sport", std::string(to_string(item.sport))},
              {"category", std::string(to_string(item.category))},
              {"subcategory", std::string(to_string(item.subcategory))},
              {"question_text", item.question_text},
              {"answer_type", std::string(to_string(item.answer_type))},
              {"ground_truth", ground_truth_to_json(item.ground_truth)},
              {"options", options},
              {"meta", meta}};
}

QAItem qa_item_from_json(const Json& j) {
  QAItem item;
  item.id = read_string(field(j, "id", ""), "id");
  item.scene_id = read_string(field(j, "scene_id", ""), "scene_id");
  item.frame_id = read_string(field(j, "frame_id", ""), "frame_id");
  item.sport = parse_sport(read_string(field(j, "sport", ""), "sport"));
  item.category = parse_category(read_string(field(j, "category", ""), "category"));
  item.subcategory = parse_subcategory(read_string(field(j, "subcategory", ""), "subcategory"));
  item.question_text = read_string(field(j, "question_text", ""), "question_text");
  item.answer_type = parse_answer_type(read_string(field(j, "answer_type", ""), "answer_type"));
  item.ground_truth = ground_truth_from_json(field(j, "ground_truth", ""), item.answer_type);
  const auto& meta = field(j, "meta", "");
  std::vector<std::string> keys;
  if (meta.contains("option_keys")) keys = meta["option_keys"].get<std::vector<std::string>>();
  const auto& options = field(j, "options", "");
  for (std::size_t i = 0; i < options.size(); ++i) {
    const std::string path = "options[" + std::to_string(i) + "]";
    item.options.push_back({read_string(field(options[i], "letter", path), path + ".letter"),
                            read_string(field(options[i], "text", path), path + ".text"),
                            i < keys.size() ? keys[i] : std::string{}});
  }
  auto& m = item.meta;
  m.template_id = meta.value("template_id", std::string{});
  m.rng_seed = meta.value("rng_seed", std::uint64_t{0});
  if (meta.contains("question_type")) m.question_type = parse_question_type(meta["question_type"].get<std::string>());
  m.entities = meta.value("entities", std::vector<std::string>{});
  m.line = meta.value("line", std::string{});
  m.answer_key = meta.value("answer_key", std::string{});
  if (meta.contains("margin")) m.margin = number_or_inf(meta["margin"], "meta.margin");
  if (meta.contains("distances"))
    for (const auto& d : meta["distances"])
      m.distances.emplace_back(d.at(0).get<std::string>(), number_or_inf(d.at(1), "meta.distances"));
  if (meta.contains("ratio_3d_2d") && !meta["ratio_3d_2d"].is_null())
    m.ratio_3d_2d = read_number(meta["ratio_3d_2d"], "meta.ratio_3d_2d");
  m.player_labels = meta.value("player_labels", std::map<std::string, int>{});
  m.flags = meta.value("flags", std::vector<std::string>{});
  if (!m.ratio_3d_2d && std::find(m.flags.begin(), m.flags.end(), "ratio_infinite") != m.flags.end())
    m.ratio_3d_2d = std::numeric_limits<double>::infinity();
  return item;
}

Json manifest_to_json(const DatasetManifest& m) {
  auto table = [](const std::map<Subcategory, std::map<Sport, int>>& t) {
    Json out = Json::object();
    for (const auto& [sub, per] : t) {
      Json row = Json::object();
      for (const auto& [sport, n] : per) row[std::string(to_string(sport))] = n;
      out[std::string(to_string(sub))] = row;
    }
    return out;
  };
  Json shortfall = Json::object();
  for (const auto& [sub, per] : m.targets)
    for (const auto& [sport, n] : per)
      if (int s = m.shortfall(sub, sport); s > 0)
        shortfall[std::string(to_string(sub))][std::string(to_string(sport))] = s;
  int target_total = 0;
  for (const auto& [sub, per] : m.targets)
    for (const auto& [sport, n] : per) target_total += n;
  return Json{{"split", m.split},
              {"seed", m.seed},
              {"targets", table(m.targets)},
              {"achieved", table(m.achieved)},
              {"shortfall", shortfall},
              {"target_total", target_total},
              {"total", m.total()},
              {"scene_ids", m.scene_ids},
              {"split_rule", m.split_rule},
              {"pool_scenes", m.pool_scenes},
              {"template_count", m.template_count}};
}

Json targets_to_json(const DistributionTargets& t) {
  Json out = Json::object();
  for (const auto& [sub, per] : t.counts)
    for (const auto& [sport, n] : per) out[std::string(to_string(sub))][std::string(to_string(sport))] = n;
  return out;
}

DistributionTargets targets_from_json(const Json& j) {
  if (!j.is_object()) throw FieldError("targets", "expected {subcategory: {sport: count}}");
  DistributionTargets t;
  for (const auto& [sub_name, per] : j.items()) {
    const std::string path = "targets." + sub_name;
    Subcategory sub;
    try {
      sub = parse_subcategory(sub_name);
    } catch (const Error& e) {
      throw FieldError(path, e.what());
    }
    if (!per.is_object()) throw FieldError(path, "expected {sport: count}");
    for (const auto& [sport_name, n] : per.items()) {
      Sport sport;
      try {
        sport = parse_sport(sport_name);
      } catch (const Error& e) {
        throw FieldError(path + "." + sport_name, e.what());
      }
      const int count = read_int(n, path + "." + sport_name);
      if (count < 0) throw FieldError(path + "." + sport_name, "must be non-negative");
      t.counts[sub][sport] = count;
    }
  }
  return t;
}

Json eval_report_to_json(const EvalReport& r, std::span<const QAItem> items) {
  auto cell = [](const Cell& c) {
    return Json{{"count", c.count}, {"sum", c.sum}, {"accuracy", finite_or_null(c.accuracy())}};
  };
  Json subs = Json::object();
  for (const auto& [s, c] : r.per_subcategory) subs[std::string(to_string(s))] = cell(c);
  Json sports = Json::object();
  for (const auto& [s, c] : r.per_sport) sports[std::string(to_string(s))] = cell(c);
  Json grid = Json::object();
  for (const auto& [sport, cells] : r.per_sport_subcategory)
    for (const auto& [s, c] : cells) grid[std::string(to_string(sport))][std::string(to_string(s))] = cell(c);
  Json per_item = Json::array();
  for (std::size_t i = 0; i < r.items.size(); ++i) {
    const auto& s = r.items[i];
    Json row{{"item_id", s.item_id}, {"score", s.score}, {"parsed", s.parsed}};
    if (s.missing) row["missing"] = true;
    if (s.type_mismatch) row["type_mismatch"] = true;
    if (i < items.size()) row["subcategory"] = std::string(to_string(items[i].subcategory));
    per_item.push_back(row);
  }
  return Json{{"overall_definition", "micro average over items"},
              {"overall", cell(r.overall)},
              {"macro", finite_or_null(r.macro)},
              {"per_subcategory", subs},
              {"per_sport", sports},
              {"per_sport_subcategory", grid},
              {"unparsed", r.unparsed},
              {"missing", r.missing},
              {"type_mismatches", r.type_mismatches},
              {"items", per_item}};
}

Json error_report_to_json(const ErrorReport& r) {
  auto summary = [](const Summary& s) {
    return Json{{"count", s.count}, {"mean", s.mean}, {"median", s.median}};
  };
  auto stats = [&](const ErrorStats& s) {
    return Json{{"records", s.records},
                {"focal_fx_pct", summary(s.focal_fx_pct)},
                {"focal_fy_pct", summary(s.focal_fy_pct)},
                {"ball_x_cm", summary(s.ball_x_cm)},
                {"ball_y_cm", summary(s.ball_y_cm)},
                {"ball_z_cm", summary(s.ball_z_cm)},
                {"pelvis_cm", summary(s.pelvis_cm)},
                {"mpjpe_cm", summary(s.mpjpe_cm)}};
  };
  Json per = Json::object();
  for (const auto& [sport, s] : r.per_sport) per[std::string(to_string(sport))] = stats(s);
  return Json{{"overall", stats(r.overall)}, {"per_sport", per}};
}

EngineRecord engine_record_from_json(const Json& j) {
  EngineRecord r;
  r.frame_id = read_string(field(j, "frame_id", ""), "frame_id");
  r.sport = parse_sport(read_string(field(j, "sport", ""), "sport"));
  if (j.contains("camera") && !j["camera"].is_null()) r.camera = camera_from_json(j["camera"]);
  if (j.contains("ball") && !j["ball"].is_null()) r.ball = read_vec3(j["ball"], "ball");
  if (j.contains("players"))
    for (const auto& [id, joints] : j["players"].items())
      for (const auto& [name, q] : joints.items())
        r.players[id][name] = read_vec3(q, "players." + id + "." + name);
  return r;
}

EngineRecord oracle_record_from_json(const Json& j) {
  EngineRecord r;
  r.frame_id = read_string(field(j, "frame_id", ""), "frame_id");
  r.sport = parse_sport(read_string(field(j, "sport", ""), "sport"));
  const auto& views = field(j, "views", "");
  if (!views.is_array()) throw FieldError("views", "expected an array");
  std::vector<ViewObservation> ball;
  std::map<std::string, std::map<std::string, std::vector<ViewObservation>>> joints;
  for (std::size_t i = 0; i < views.size(); ++i) {
    const std::string path = "views[" + std::to_string(i) + "]";
    const auto cam = camera_from_json(field(views[i], "camera", path), path + ".camera");
    if (i == 0) r.camera = cam;  // the broadcast view comes first
    if (views[i].contains("ball") && !views[i]["ball"].is_null())
      ball.push_back({cam, read_vec2(views[i]["ball"], path + ".ball")});
    if (views[i].contains("joints"))
      for (const auto& [id, named] : views[i]["joints"].items())
        for (const auto& [name, px] : named.items())
          joints[id][name].push_back({cam, read_vec2(px, path + ".joints." + id + "." + name)});
  }
  if (ball.size() >= 2) r.ball = triangulate(ball).point;
  for (const auto& [id, named] : joints)
    for (const auto& [name, obs] : named)
      if (obs.size() >= 2) r.players[id][name] = triangulate(obs).point;
  return r;
}

std::string dump_document(const Json& j) { return j.dump(2) + "\n"; }
std::string dump_line(const Json& j) { return j.dump(); }

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

Json read_json_file(const std::filesystem::path& path) {
  try {
    return Json::parse(read_text_file(path));
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::parse_error, path.string() + ": " + e.what());
  }
}

std::vector<Json> read_jsonl(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<Json> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::parse_error, path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

std::vector<QAItem> read_qa_file(const std::filesystem::path& path) {
  std::vector<QAItem> items;
  for (const auto& j : read_jsonl(path)) items.push_back(qa_item_from_json(j));
  return items;
}

void write_qa_file(const std::filesystem::path& path, std::span<const QAItem> items) {
  std::string text;
  for (const auto& item : items) {
    text += dump_line(qa_item_to_json(item));
    text += "\n";
  }
  write_text_file(path, text);
}

std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
  std::vector<Prediction> out;
  std::size_t n = 0;
  for (const auto& j : read_jsonl(path)) {
    ++n;
    const std::string where = "line " + std::to_string(n);
    Prediction p;
    p.item_id = read_string(field(j, "item_id", where), where + ".item_id");
    p.raw_text = read_string(field(j, "raw_text", where), where + ".raw_text");
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace courtlab
