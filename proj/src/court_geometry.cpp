#include "courtlab/court_geometry.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace courtlab {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::unsupported_sport: return "unsupported-sport";
    case ErrorCode::out_of_play: return "out-of-play";
    case ErrorCode::unknown_line: return "unknown-line";
    case ErrorCode::insufficient_correspondences: return "insufficient-correspondences";
    case ErrorCode::degenerate_geometry: return "degenerate-geometry";
    case ErrorCode::calibration_failed: return "calibration-failed";
    case ErrorCode::no_intersection: return "no-intersection";
    case ErrorCode::behind_camera: return "behind-camera";
    case ErrorCode::non_increasing_times: return "non-increasing-times";
    case ErrorCode::ill_conditioned: return "ill-conditioned";
    case ErrorCode::invalid_geometry: return "invalid-geometry";
    case ErrorCode::empty_input: return "empty-input";
    case ErrorCode::missing_entity: return "missing-entity";
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::mismatched_joints: return "mismatched-joints";
    case ErrorCode::duplicate_prediction: return "duplicate-prediction";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::not_found: return "not-found";
    case ErrorCode::conflict: return "conflict";
    case ErrorCode::io_error: return "io-error";
  }
  return "unknown";
}

std::string_view to_string(Sport sport) noexcept {
  switch (sport) {
    case Sport::badminton: return "badminton";
    case Sport::tennis: return "tennis";
    case Sport::table_tennis: return "table_tennis";
    case Sport::pickleball: return "pickleball";
  }
  return "unknown";
}

Sport parse_sport(std::string_view name) {
  for (Sport s : kAllSports) {
    if (to_string(s) == name) return s;
  }
  throw Error(ErrorCode::unsupported_sport, "unsupported sport '" + std::string(name) + "'");
}

std::string_view to_string(Zone zone) noexcept {
  switch (zone) {
    case Zone::forecourt: return "forecourt";
    case Zone::midcourt: return "midcourt";
    case Zone::backcourt: return "backcourt";
  }
  return "unknown";
}

std::string_view to_string(CourtHalf half) noexcept {
  return half == CourtHalf::far ? "far" : "near";
}

const CourtLine& CourtSpec::line(std::string_view name) const {
  for (const auto& l : lines) {
    if (l.name == name) return l;
  }
  throw Error(ErrorCode::unknown_line, "unknown court line '" + std::string(name) + "'");
}

bool CourtSpec::has_line(std::string_view name) const noexcept {
  for (const auto& l : lines) {
    if (l.name == name) return true;
  }
  return false;
}

namespace {

struct Wording {
  const char* sport_name;
  const char* ball_name;
  const char* origin_phrase;
  const char* baseline_phrase;
  const char* baseline_word;   // "baseline" / "endline"
  const char* sideline_word;   // "doubles sideline" / "sideline"
  const char* service_word;    // "service line" / "non-volley line" / nullptr
  const char* center_phrase;
};

Wording wording_for(Sport sport) {
  switch (sport) {
    case Sport::badminton:
      return {"badminton", "the shuttlecock",
              "the intersection of the far baseline and the left doubles sideline",
              "the far baseline", "baseline", "doubles sideline", "service line",
              "the center line"};
    case Sport::tennis:
      return {"tennis", "the tennis ball",
              "the intersection of the far baseline and the left doubles sideline",
              "the far baseline", "baseline", "doubles sideline", "service line",
              "the center service line"};
    case Sport::table_tennis:
      return {"table tennis", "the ping pong ball", "the top-left corner of the table surface",
              "the far endline", "endline", "sideline", nullptr, "the center line"};
    case Sport::pickleball:
      return {"pickleball", "the pickleball",
              "the intersection of the far baseline and the left sideline", "the far baseline",
              "baseline", "sideline", "non-volley line", "the centerline"};
  }
  throw Error(ErrorCode::unsupported_sport, "unsupported sport");
}

AmbiguityThresholds default_thresholds(Sport sport) {
  AmbiguityThresholds t;
  if (sport == Sport::table_tennis) {
    // The table is 1.525 m wide; floor-court margins would discard most items.
    t.lateral_m = 0.05;
    t.depth_m = 0.05;
  }
  return t;
}

}  // namespace

CourtSpec make_court_spec(Sport sport, double length_m, double width_m,
                          double net_height_post_m, double net_height_center_m,
                          double surface_height_m, double service_line_from_net_m) {
  const Wording w = wording_for(sport);
  CourtSpec spec;
  spec.sport = sport;
  spec.sport_name = w.sport_name;
  spec.ball_name = w.ball_name;
  spec.origin_phrase = w.origin_phrase;
  spec.baseline_phrase = w.baseline_phrase;
  spec.length_m = length_m;
  spec.width_m = width_m;
  spec.net_height_post_m = net_height_post_m;
  spec.net_height_center_m = net_height_center_m;
  spec.surface_height_m = surface_height_m;
  spec.service_line_from_net_m = service_line_from_net_m;
  spec.ambiguity = default_thresholds(sport);

  const double L = length_m;
  const double W = width_m;
  const double h = surface_height_m;
  const double mid = 0.5 * L;
  spec.keypoints = {
      {"far_left", Vec3(0.0, 0.0, h)},
      {"far_right", Vec3(0.0, W, h)},
      {"near_right", Vec3(L, W, h)},
      {"near_left", Vec3(L, 0.0, h)},
      {"net_left_top", Vec3(mid, 0.0, h + net_height_post_m)},
      {"net_right_top", Vec3(mid, W, h + net_height_post_m)},
  };

  auto add = [&spec](std::string name, std::string display, Vec2 a, Vec2 b) {
    spec.lines.push_back(CourtLine{std::move(name), std::move(display), Segment2{a, b}});
  };
  const std::string base = w.baseline_word;
  const std::string side = w.sideline_word;
  add("far_baseline", "the far " + base, Vec2(0.0, 0.0), Vec2(0.0, W));
  add("near_baseline", "the near " + base, Vec2(L, 0.0), Vec2(L, W));
  add("left_sideline", "the left " + side, Vec2(0.0, 0.0), Vec2(L, 0.0));
  add("right_sideline", "the right " + side, Vec2(0.0, W), Vec2(L, W));
  add("net", "the net", Vec2(mid, 0.0), Vec2(mid, W));
  if (w.service_word != nullptr) {
    const std::string svc = w.service_word;
    add("far_service_line", "the far " + svc, Vec2(mid - service_line_from_net_m, 0.0),
        Vec2(mid - service_line_from_net_m, W));
    add("near_service_line", "the near " + svc, Vec2(mid + service_line_from_net_m, 0.0),
        Vec2(mid + service_line_from_net_m, W));
  }
  spec.center_line = Segment2{Vec2(0.0, 0.5 * W), Vec2(L, 0.5 * W)};
  add("center_line", w.center_phrase, spec.center_line.a, spec.center_line.b);

  check_court_spec(spec);
  return spec;
}

void check_court_spec(const CourtSpec& spec) {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::invalid_argument, "court spec invariant violated: " + what);
  };
  if (!(spec.length_m > 0.0)) fail("length_m > 0");
  if (!(spec.width_m > 0.0)) fail("width_m > 0");
  if (!(spec.net_height_post_m > 0.0) || !(spec.net_height_center_m > 0.0)) fail("net heights > 0");
  if (!(spec.surface_height_m >= 0.0)) fail("surface_height_m >= 0");
  if (!(spec.service_line_from_net_m > 0.0) || !(spec.service_line_from_net_m < spec.half_length()))
    fail("0 < service_line_from_net_m < length_m / 2");

  for (auto name : kCornerNames) {
    auto it = spec.keypoints.find(std::string(name));
    if (it == spec.keypoints.end()) fail("missing keypoint " + std::string(name));
    if (it->second.z() != spec.surface_height_m) fail("corner off the playing surface");
  }
  const Vec3& fl = spec.keypoints.at("far_left");
  const Vec3& fr = spec.keypoints.at("far_right");
  const Vec3& nr = spec.keypoints.at("near_right");
  const Vec3& nl = spec.keypoints.at("near_left");
  if ((fr - fl).norm() != spec.width_m || (nl - fl).norm() != spec.length_m ||
      (nr - nl).norm() != spec.width_m || (nr - fr).norm() != spec.length_m)
    fail("corners do not span length_m x width_m");
  const double diagonal = std::hypot(spec.length_m, spec.width_m);
  if (std::abs((nr - fl).norm() - diagonal) > 1e-12 || std::abs((fr - nl).norm() - diagonal) > 1e-12)
    fail("corner diagonals are not sqrt(L^2 + W^2)");
  for (auto name : kNetNames) {
    auto it = spec.keypoints.find(std::string(name));
    if (it == spec.keypoints.end()) fail("missing keypoint " + std::string(name));
    if (it->second.x() != spec.half_length()) fail("net keypoint off the midline");
    if (it->second.z() != spec.surface_height_m + spec.net_height_post_m) fail("net keypoint height");
  }
}

const CourtSpec& court_spec(Sport sport) {
  static const CourtSpec badminton =
      make_court_spec(Sport::badminton, 13.40, 6.10, 1.55, 1.524, 0.0, 1.98);
  static const CourtSpec tennis =
      make_court_spec(Sport::tennis, 23.77, 10.97, 1.07, 0.914, 0.0, 6.40);
  // Table tennis has no service line; the forecourt band is the net-side
  // half of each half-table.
  static const CourtSpec table_tennis =
      make_court_spec(Sport::table_tennis, 2.74, 1.525, 0.1525, 0.1525, 0.76, 0.685);
  static const CourtSpec pickleball =
      make_court_spec(Sport::pickleball, 13.41, 6.10, 0.914, 0.864, 0.0, 2.13);
  switch (sport) {
    case Sport::badminton: return badminton;
    case Sport::tennis: return tennis;
    case Sport::table_tennis: return table_tennis;
    case Sport::pickleball: return pickleball;
  }
  throw Error(ErrorCode::unsupported_sport, "unsupported sport");
}

ZoneResult zone_of(const Vec3& point, const CourtSpec& spec, double margin) {
  const double x = point.x();
  const double y = point.y();
  if (!std::isfinite(x) || !std::isfinite(y) || x < -margin || x > spec.length_m + margin ||
      y < -margin || y > spec.width_m + margin) {
    throw Error(ErrorCode::out_of_play, "point is outside the court footprint plus margin");
  }
  const double mid = spec.half_length();
  const double from_net = std::abs(x - mid);
  const double svc = spec.service_line_from_net_m;
  ZoneResult r{};
  r.half = x <= mid ? CourtHalf::far : CourtHalf::near;
  // Ties go to the band nearer the net.
  if (from_net <= svc) {
    r.zone = Zone::forecourt;
  } else if (from_net <= mid) {
    r.zone = Zone::midcourt;
  } else {
    r.zone = Zone::backcourt;
  }
  r.boundary_margin_m = std::min(std::abs(from_net - svc), std::abs(from_net - mid));
  return r;
}

double point_line_distance_2d(const Vec2& p, const Segment2& line) noexcept {
  const Vec2 d = line.b - line.a;
  const Vec2 w = p - line.a;
  const double cross = d.x() * w.y() - d.y() * w.x();
  return std::abs(cross) / d.norm();
}

double line_distance(const Vec3& point, std::string_view line_name, const CourtSpec& spec) {
  return point_line_distance_2d(point.head<2>(), spec.line(line_name).segment);
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double to_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const char* begin = value.data();
  const char* end = begin + value.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::parse_error, "court config: '" + key + "' is not a number");
  }
  return out;
}

}  // namespace

CourtSpec parse_court_config(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::parse_error,
                  "court config line " + std::to_string(line_no) + ": expected key = value");
    }
    kv[trim(std::string_view(line).substr(0, eq))] = trim(std::string_view(line).substr(eq + 1));
  }
  if (kv["format_version"] != "1") {
    throw Error(ErrorCode::parse_error, "court config: format_version must be 1");
  }
  if (!kv.count("sport")) throw Error(ErrorCode::parse_error, "court config: missing sport");
  const Sport sport = parse_sport(kv["sport"]);
  const CourtSpec& base = court_spec(sport);

  auto num = [&](const char* key, double fallback) {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : to_double(key, it->second);
  };
  CourtSpec spec = make_court_spec(
      sport, num("length_m", base.length_m), num("width_m", base.width_m),
      num("net_height_post_m", base.net_height_post_m),
      num("net_height_center_m", base.net_height_center_m),
      num("surface_height_m", base.surface_height_m),
      num("service_line_from_net_m", base.service_line_from_net_m));
  spec.ambiguity.lateral_m = num("ambiguity_lateral_m", spec.ambiguity.lateral_m);
  spec.ambiguity.depth_m = num("ambiguity_depth_m", spec.ambiguity.depth_m);
  spec.ambiguity.camera_view_px = num("ambiguity_camera_view_px", spec.ambiguity.camera_view_px);
  spec.ambiguity.center_line_m = num("ambiguity_center_line_m", spec.ambiguity.center_line_m);
  if (kv.count("ambiguity_egocentric_deg")) {
    const double deg = to_double("ambiguity_egocentric_deg", kv["ambiguity_egocentric_deg"]);
    spec.ambiguity.egocentric_sin = std::sin(deg * M_PI / 180.0);
  }
  if (kv.count("sport_name")) spec.sport_name = kv["sport_name"];
  if (kv.count("ball_name")) spec.ball_name = kv["ball_name"];
  return spec;
}

CourtSpec load_court_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open court config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_court_config(buf.str());
}

std::string format_court_config(const CourtSpec& spec) {
  std::ostringstream out;
  out.precision(17);
  out << "# court layout, meters\n"
      << "format_version = 1\n"
      << "sport = " << to_string(spec.sport) << "\n"
      << "sport_name = " << spec.sport_name << "\n"
      << "ball_name = " << spec.ball_name << "\n"
      << "length_m = " << spec.length_m << "\n"
      << "width_m = " << spec.width_m << "\n"
      << "net_height_post_m = " << spec.net_height_post_m << "\n"
      << "net_height_center_m = " << spec.net_height_center_m << "\n"
      << "surface_height_m = " << spec.surface_height_m << "\n"
      << "service_line_from_net_m = " << spec.service_line_from_net_m << "\n"
      << "ambiguity_lateral_m = " << spec.ambiguity.lateral_m << "\n"
      << "ambiguity_depth_m = " << spec.ambiguity.depth_m << "\n"
      << "ambiguity_camera_view_px = " << spec.ambiguity.camera_view_px << "\n"
      << "ambiguity_egocentric_deg = "
      << std::asin(spec.ambiguity.egocentric_sin) * 180.0 / M_PI << "\n"
      << "ambiguity_center_line_m = " << spec.ambiguity.center_line_m << "\n";
  return out.str();
}

CourtRegistry::CourtRegistry() {
  for (Sport s : kAllSports) specs_.emplace(s, court_spec(s));
}

const CourtSpec& CourtRegistry::get(Sport sport) const {
  auto it = specs_.find(sport);
  if (it == specs_.end()) throw Error(ErrorCode::unsupported_sport, "unsupported sport");
  return it->second;
}

void CourtRegistry::set(CourtSpec spec) {
  check_court_spec(spec);
  const Sport s = spec.sport;
  specs_.insert_or_assign(s, std::move(spec));
}

void CourtRegistry::load(const std::filesystem::path& path) { set(load_court_config(path)); }

}  // namespace courtlab
