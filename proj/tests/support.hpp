#pragma once

// Shared fixtures for the unit and acceptance tests, including an answer
// oracle that re-derives QA ground truth from raw scene data without going
// through the library's geometry helpers.

#include "courtlab/qa_generation.hpp"
#include "courtlab/synthetic.hpp"

#include <cmath>
#include <filesystem>
#include <optional>
#include <random>
#include <string>

namespace testsupport {

using namespace courtlab;

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("courtlab-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline Vec3 rand_vec(std::mt19937_64& rng, const Vec3& lo, const Vec3& hi) {
  return {uniform(rng, lo.x(), hi.x()), uniform(rng, lo.y(), hi.y()), uniform(rng, lo.z(), hi.z())};
}

/// Camera looking straight down from (0, 0, 5): fx = fy = 1000,
/// principal point (500, 500), R = diag(1, -1, -1).
inline PinholeCamera downward_camera() {
  PinholeCamera c;
  c.fx = c.fy = 1000.0;
  c.cx = c.cy = 500.0;
  c.rotation = Vec3(1.0, -1.0, -1.0).asDiagonal();
  c.translation = -c.rotation * Vec3(0.0, 0.0, 5.0);
  c.image_size = {1000, 1000};
  return c;
}

/// Pixel from the textbook formula K (R X + t) / z.
inline std::optional<Vec2> pinhole(const PinholeCamera& c, const Vec3& X) {
  double cam[3];
  for (int i = 0; i < 3; ++i) {
    cam[i] = c.translation[i];
    for (int k = 0; k < 3; ++k) cam[i] += c.rotation(i, k) * X[k];
  }
  if (cam[2] <= 0.0) return std::nullopt;
  return Vec2(c.fx * cam[0] / cam[2] + c.cx, c.fy * cam[1] / cam[2] + c.cy);
}

namespace oracle {

inline double dist(const Vec3& a, const Vec3& b) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline const PlayerState* player(const SceneState& s, int label) {
  for (const auto& p : s.players)
    if (p.label == label) return &p;
  return nullptr;
}

inline Vec3 camera_center(const PinholeCamera& c) {
  // Solve R C = -t with R orthonormal: C = -R^T t, written out per row.
  Vec3 out;
  for (int k = 0; k < 3; ++k) {
    out[k] = 0.0;
    for (int i = 0; i < 3; ++i) out[k] -= c.rotation(i, k) * c.translation[i];
  }
  return out;
}

inline std::optional<Vec3> position(const SceneState& s, const EntityRef& r) {
  switch (r.kind) {
    case EntityRef::Kind::camera: return camera_center(s.camera);
    case EntityRef::Kind::ball:
      if (s.ball && s.ball->position) return *s.ball->position;
      return std::nullopt;
    case EntityRef::Kind::player:
      if (const auto* p = player(s, r.player)) return p->pelvis;
      return std::nullopt;
    case EntityRef::Kind::joint:
      if (const auto* p = player(s, r.player))
        if (auto it = p->joints.find(r.joint); it != p->joints.end()) return it->second;
      return std::nullopt;
  }
  return std::nullopt;
}

/// Distance from (x, y) to the infinite line through a and b, via the
/// foot of the perpendicular.
inline double line_dist(const Vec2& p, const Vec2& a, const Vec2& b) {
  const double dx = b.x() - a.x(), dy = b.y() - a.y();
  const double t = ((p.x() - a.x()) * dx + (p.y() - a.y()) * dy) / (dx * dx + dy * dy);
  const double fx = a.x() + t * dx, fy = a.y() + t * dy;
  return std::hypot(p.x() - fx, p.y() - fy);
}

/// Zone by explicit band intervals along X, measured from each baseline.
inline std::string zone(double x, const CourtSpec& spec) {
  const double L = spec.length_m, mid = L / 2, svc = spec.service_line_from_net_m;
  const bool far = x <= mid;
  const double from_baseline = far ? x : L - x;  // negative beyond the baseline
  if (from_baseline < 0.0) return "backcourt";
  if (from_baseline < mid - svc) return "midcourt";
  return "forecourt";
}

struct Answer {
  AnswerValue value;
  /// Distance of the deciding quantity from a decision boundary, in the
  /// quantity's own units. Values within 1e-9 of a boundary are not compared.
  double boundary_gap = std::numeric_limits<double>::infinity();
};

inline int nearest(const std::vector<std::pair<int, double>>& c, double& gap) {
  // Exhaustive: the winner beats every other candidate.
  int best = -1;
  gap = std::numeric_limits<double>::infinity();
  for (const auto& [la, da] : c) {
    bool wins = true;
    for (const auto& [lb, db] : c)
      if (lb != la && db <= da) wins = false;
    if (wins) best = la;
  }
  for (const auto& [la, da] : c)
    for (const auto& [lb, db] : c)
      if (la < lb) gap = std::min(gap, std::abs(da - db));
  return best;
}

inline std::string ego(const PlayerState& obs, const Vec3& target, double& gap) {
  // Target bearing relative to the heading: positive angles are to the
  // observer's left when Z is up.
  const double heading = std::atan2(obs.facing.y(), obs.facing.x());
  const double bearing = std::atan2(target.y() - obs.pelvis.y(), target.x() - obs.pelvis.x());
  double rel = bearing - heading;
  while (rel > M_PI) rel -= 2 * M_PI;
  while (rel <= -M_PI) rel += 2 * M_PI;
  gap = std::min(std::abs(rel), M_PI - std::abs(rel));
  return rel > 0.0 ? "left" : "right";
}

inline std::optional<std::string> camera_side(const PinholeCamera& cam, double ua, double ub,
                                              double band, double& gap) {
  (void)cam;
  const double du = ua - ub;
  gap = std::min(std::abs(std::abs(du) - band), std::abs(du));
  if (std::abs(du) <= band) return "front_behind";
  return du < 0.0 ? "left" : "right";
}

/// Independent ground truth; nullopt where the oracle has no answer
/// (missing entity, projection behind the camera).
inline std::optional<Answer> answer(const SceneState& s, const CourtSpec& spec, QuestionType t,
                                    const QueryParams& q) {
  Answer out;
  auto pos = [&](const std::optional<EntityRef>& r) { return r ? position(s, *r) : std::nullopt; };
  const double z0 = spec.surface_height_m;
  const Vec3 C = camera_center(s.camera);
  auto u_of = [&](const Vec3& p) -> std::optional<double> {
    auto px = pinhole(s.camera, p);
    if (!px) return std::nullopt;
    return px->x();
  };
  auto line_of = [&](const std::string& name) -> const CourtLine* {
    for (const auto& l : spec.lines)
      if (l.name == name) return &l;
    return nullptr;
  };

  switch (t) {
    case QuestionType::cam_obj_distance: {
      auto a = pos(q.a);
      if (!a) return std::nullopt;
      out.value = dist(C, *a);
      return out;
    }
    case QuestionType::obj_obj_distance: {
      auto a = pos(q.a), b = pos(q.b);
      if (!a || !b) return std::nullopt;
      out.value = dist(*a, *b);
      return out;
    }
    case QuestionType::obj_line_distance: {
      auto a = pos(q.a);
      const auto* l = line_of(q.line);
      if (!a || !l) return std::nullopt;
      out.value = line_dist(a->head<2>(), l->segment.a, l->segment.b);
      return out;
    }
    case QuestionType::height: {
      auto a = pos(q.a);
      if (!a) return std::nullopt;
      out.value = a->z() - z0;
      return out;
    }
    case QuestionType::localization: {
      auto a = pos(q.a);
      if (!a) return std::nullopt;
      out.value = Vec3(a->x(), a->y(), a->z() - z0);
      return out;
    }
    case QuestionType::player_count: {
      long long n = 0;
      for (const auto& p : s.players) {
        auto px = pinhole(s.camera, p.pelvis);
        if (px && px->x() >= 0 && px->y() >= 0 && px->x() < s.camera.image_size.width &&
            px->y() < s.camera.image_size.height)
          ++n;
      }
      out.value = n;
      return out;
    }
    case QuestionType::ball_visible:
      out.value = std::string(s.ball && s.ball->visible ? "yes" : "no");
      return out;
    case QuestionType::pp_nearest:
    case QuestionType::bp_nearest:
    case QuestionType::cp_nearest:
    case QuestionType::pl_nearest: {
      std::vector<std::pair<int, double>> c;
      std::optional<Vec3> ref;
      int skip = -1;
      if (t == QuestionType::pp_nearest) {
        ref = pos(q.a);
        if (!q.a || q.a->kind != EntityRef::Kind::player || !ref) return std::nullopt;
        skip = q.a->player;
      } else if (t == QuestionType::bp_nearest) {
        ref = pos(EntityRef::ball());
        if (!ref) return std::nullopt;
      } else if (t == QuestionType::cp_nearest) {
        ref = C;
      }
      const auto* l = t == QuestionType::pl_nearest ? line_of(q.line) : nullptr;
      if (t == QuestionType::pl_nearest && !l) return std::nullopt;
      for (const auto& p : s.players) {
        if (p.label == skip) continue;
        c.emplace_back(p.label, l ? line_dist(p.pelvis.head<2>(), l->segment.a, l->segment.b)
                                  : dist(p.pelvis, *ref));
      }
      if (c.size() < 2) return std::nullopt;
      const int best = nearest(c, out.boundary_gap);
      if (best < 0) return std::nullopt;
      out.value = "player:" + std::to_string(best);
      return out;
    }
    case QuestionType::pp_ego_side:
    case QuestionType::bp_ego_side:
    case QuestionType::cp_ego_side: {
      if (!q.a || q.a->kind != EntityRef::Kind::player) return std::nullopt;
      const auto* obs = player(s, q.a->player);
      if (!obs) return std::nullopt;
      std::optional<Vec3> target = t == QuestionType::pp_ego_side   ? pos(q.b)
                                   : t == QuestionType::bp_ego_side ? pos(EntityRef::ball())
                                                                    : std::optional<Vec3>(C);
      if (!target) return std::nullopt;
      out.value = ego(*obs, *target, out.boundary_gap);
      return out;
    }
    case QuestionType::pp_camera_side:
    case QuestionType::bp_camera_side:
    case QuestionType::cp_camera_side: {
      auto a = pos(q.a);
      if (!a) return std::nullopt;
      auto ua = u_of(*a);
      std::optional<double> ub;
      if (t == QuestionType::pp_camera_side) {
        auto b = pos(q.b);
        if (!b) return std::nullopt;
        ub = u_of(*b);
      } else if (t == QuestionType::bp_camera_side) {
        auto b = pos(EntityRef::ball());
        if (!b) return std::nullopt;
        ub = u_of(*b);
      } else {
        ub = s.camera.cx;
      }
      if (!ua || !ub) return std::nullopt;
      auto side = camera_side(s.camera, *ua, *ub, spec.ambiguity.camera_view_px, out.boundary_gap);
      out.value = *side;
      return out;
    }
    case QuestionType::ball_zone: {
      auto b = pos(EntityRef::ball());
      if (!b) return std::nullopt;
      if (spec.sport == Sport::table_tennis) {
        const double d = b->y() - spec.width_m / 2;
        const double band = spec.ambiguity.center_line_m;
        out.boundary_gap = std::min(std::abs(std::abs(d) - band), std::abs(d));
        out.value = std::string(d < -band ? "left" : d > band ? "right" : "center");
      } else {
        const double x = b->x();
        const double L = spec.length_m;
        out.boundary_gap = std::min({std::abs(x), std::abs(L - x),
                                     std::abs(std::abs(x - L / 2) - spec.service_line_from_net_m)});
        out.value = zone(x, spec);
      }
      return out;
    }
    case QuestionType::ball_net_height: {
      auto b = pos(EntityRef::ball());
      if (!b) return std::nullopt;
      const double top = z0 + spec.net_height_center_m;
      out.boundary_gap = std::abs(b->z() - top);
      out.value = std::string(b->z() > top ? "above" : "below");
      return out;
    }
    case QuestionType::player_zone: {
      auto a = pos(q.a);
      if (!a || spec.sport == Sport::table_tennis) return std::nullopt;
      const double x = a->x(), L = spec.length_m;
      out.boundary_gap = std::min({std::abs(x), std::abs(L - x),
                                   std::abs(std::abs(x - L / 2) - spec.service_line_from_net_m)});
      out.value = zone(x, spec);
      return out;
    }
  }
  return std::nullopt;
}

}  // namespace oracle

/// Compares a derived value with the oracle's. Returns an empty string on a
/// match and a description otherwise.
inline std::string compare(const AnswerValue& got, const oracle::Answer& want) {
  if (got.index() != want.value.index()) return "type differs";
  if (const auto* g = std::get_if<double>(&got)) {
    const double w = std::get<double>(want.value);
    if (std::abs(*g - w) > 1e-9 * std::max(1.0, std::abs(w)))
      return "value " + std::to_string(*g) + " vs " + std::to_string(w);
    return {};
  }
  if (const auto* g = std::get_if<Vec3>(&got)) {
    if ((*g - std::get<Vec3>(want.value)).norm() > 1e-9) return "coordinate differs";
    return {};
  }
  if (const auto* g = std::get_if<long long>(&got)) {
    if (*g != std::get<long long>(want.value)) return "count differs";
    return {};
  }
  const auto& gs = std::get<std::string>(got);
  const auto& ws = std::get<std::string>(want.value);
  if (gs != ws && want.boundary_gap > 1e-9) return "answer " + gs + " vs " + ws;
  return {};
}

/// Re-derives a generated item's answer with the oracle, from the bindings
/// recorded in its metadata. MCQ letters are mapped back to option keys.
inline std::string check_item(const QAItem& item, const SceneState& scene, const CourtSpec& spec) {
  QueryParams q;
  const auto& ents = item.meta.entities;
  if (!ents.empty()) q.a = parse_entity(ents[0]);
  if (ents.size() > 1) q.b = parse_entity(ents[1]);
  q.line = item.meta.line;
  const auto want = oracle::answer(scene, spec, item.meta.question_type, q);
  if (!want) return "oracle has no answer";
  AnswerValue got = item.ground_truth;
  if (item.answer_type == AnswerType::mcq) {
    const auto& letter = std::get<std::string>(item.ground_truth);
    int hits = 0;
    for (const auto& o : item.options)
      if (o.letter == letter) {
        got = o.key;
        ++hits;
      }
    if (hits != 1) return "ground-truth letter " + letter + " is not exactly one option";
    if (item.options.size() < 2 || item.options.size() > 4) return "option count out of range";
  }
  const auto diff = compare(got, *want);
  return diff.empty() ? diff : item.meta.template_id + ": " + diff;
}

/// A scene for hand-built examples: downward camera replaced by a broadcast
/// camera from `seed`, the given players (pelvis, facing), optional ball.
inline SceneState make_scene(Sport sport, const std::vector<std::pair<Vec3, Vec2>>& players,
                             std::optional<Vec3> ball, std::uint64_t seed = 1) {
  SceneState s;
  s.scene_id = "hand";
  s.frame_id = "000000";
  s.sport = sport;
  std::mt19937_64 rng(seed);
  s.camera = random_broadcast_camera(court_spec(sport), rng);
  int i = 0;
  for (const auto& [pelvis, facing] : players) {
    PlayerState p;
    p.player_id = "p" + std::to_string(i);
    p.pelvis = pelvis;
    p.facing = facing.normalized();
    p.joints["pelvis"] = pelvis;
    p.lowest_point = pelvis - Vec3(0, 0, pelvis.z());
    p.bbox = {100.0 * i, 0, 100.0 * i + 50, 100};
    s.players.push_back(p);
    ++i;
  }
  if (ball) s.ball = BallState{*ball, true};
  assign_player_labels(s);
  return s;
}

}  // namespace testsupport
