#include "courtlab/synthetic.hpp"

#include "courtlab/qa_generation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace courtlab {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::vector<Vec3> court_keypoints(const CourtSpec& spec) {
  std::vector<Vec3> out;
  for (const auto& [name, p] : spec.keypoints) out.push_back(p);
  return out;
}

}  // namespace

PinholeCamera random_broadcast_camera(const CourtSpec& spec, std::mt19937_64& rng,
                                      const BroadcastCameraRange& range) {
  const auto keypoints = court_keypoints(spec);
  const Vec3 target(spec.half_length(), 0.5 * spec.width_m, spec.surface_height_m);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const double el = uniform(rng, range.elevation_min_deg, range.elevation_max_deg) * kDeg;
    const double az = uniform(rng, -range.azimuth_max_deg, range.azimuth_max_deg) * kDeg;
    const double r = uniform(rng, range.range_min_m, range.range_max_m);
    const Vec3 eye = target + r * Vec3(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az),
                                       std::sin(el));
    const Vec2 c = range.image.center();
    PinholeCamera cam = PinholeCamera::look_at(eye, target, 1.0, 1.0, 0.0, 0.0, range.image);

    double max_x = 0.0;
    double max_y = 0.0;
    bool ok = true;
    for (const auto& k : keypoints) {
      const Vec3 pc = cam.to_camera(k);
      if (pc.z() < range.min_depth_m) {
        ok = false;
        break;
      }
      max_x = std::max(max_x, std::abs(pc.x() / pc.z()));
      max_y = std::max(max_y, std::abs(pc.y() / pc.z()));
    }
    if (!ok || max_x == 0.0 || max_y == 0.0) continue;
    const double f = range.fill * std::min(c.x() / max_x, c.y() / max_y);
    cam.fx = cam.fy = f;
    cam.cx = c.x();
    cam.cy = c.y();
    return cam;
  }
  throw Error(ErrorCode::invalid_argument, "no camera placement satisfies the range for " +
                                               std::string(to_string(spec.sport)));
}

std::map<std::string, Vec3> synthetic_joints(const Vec3& pelvis, double facing_rad,
                                             std::mt19937_64& rng) {
  const Vec3 f(std::cos(facing_rad), std::sin(facing_rad), 0.0);
  const Vec3 left(-f.y(), f.x(), 0.0);
  const Vec3 up = Vec3::UnitZ();
  const double hip = 0.1;
  const double stance = uniform(rng, 0.12, 0.35);
  const double stride = uniform(rng, -0.25, 0.25);
  const double ground = pelvis.z() - 0.95;  // floor level under a standing pelvis

  std::map<std::string, Vec3> j;
  j["pelvis"] = pelvis;
  j["left_hip"] = pelvis + hip * left;
  j["right_hip"] = pelvis - hip * left;
  j["spine"] = pelvis + 0.3 * up;
  j["neck"] = pelvis + 0.55 * up;
  j["head"] = pelvis + 0.72 * up + 0.03 * f;
  const double lift = uniform(rng, 0.0, 0.05);
  j["left_ankle"] = pelvis + stance * left + stride * f + (ground + 0.08 + lift - pelvis.z()) * up;
  j["right_ankle"] = pelvis - stance * left - stride * f + (ground + 0.08 - pelvis.z()) * up;
  j["left_knee"] = 0.5 * (j["left_hip"] + j["left_ankle"]) + 0.08 * f;
  j["right_knee"] = 0.5 * (j["right_hip"] + j["right_ankle"]) + 0.08 * f;
  j["left_shoulder"] = j["neck"] + 0.18 * left - 0.05 * up;
  j["right_shoulder"] = j["neck"] - 0.18 * left - 0.05 * up;
  j["left_wrist"] = j["left_shoulder"] + uniform(rng, 0.0, 0.4) * f + uniform(rng, 0.0, 0.3) * left +
                    uniform(rng, -0.5, 0.5) * up;
  j["right_wrist"] = j["right_shoulder"] + uniform(rng, 0.0, 0.5) * f -
                     uniform(rng, 0.0, 0.3) * left + uniform(rng, -0.5, 0.6) * up;
  return j;
}

SceneState synthetic_scene(const CourtSpec& spec, std::uint64_t seed, std::string scene_id,
                           std::string frame_id, const SyntheticSceneOptions& options) {
  std::mt19937_64 rng(seed);
  SceneState s;
  s.scene_id = std::move(scene_id);
  s.frame_id = std::move(frame_id);
  s.sport = spec.sport;
  s.camera = random_broadcast_camera(spec, rng, options.camera);

  const double L = spec.length_m;
  const double W = spec.width_m;
  const bool table = spec.sport == Sport::table_tennis;
  const int span = options.max_players - options.min_players + 1;
  const int n = options.min_players + static_cast<int>(rng() % static_cast<std::uint64_t>(span));

  for (int i = 0; i < n; ++i) {
    PlayerState p;
    char id[16];
    std::snprintf(id, sizeof id, "p%d", i);
    p.player_id = id;
    const bool far = i % 2 == 0;
    double x;
    if (table) {
      x = far ? uniform(rng, -2.5, -0.35) : uniform(rng, L + 0.35, L + 2.5);
    } else {
      x = far ? uniform(rng, -2.0, 0.5 * L - 0.4) : uniform(rng, 0.5 * L + 0.4, L + 2.0);
    }
    const double y = uniform(rng, -0.8, W + 0.8);
    const double z = 0.9 + uniform(rng, 0.0, 0.2);
    p.pelvis = Vec3(x, y, z);
    const double heading = (far ? 0.0 : std::numbers::pi) + uniform(rng, -75.0, 75.0) * kDeg;
    p.facing = Vec2(std::cos(heading), std::sin(heading));
    p.joints = synthetic_joints(p.pelvis, heading, rng);
    p.lowest_point = p.joints["pelvis"];
    for (const auto& [name, q] : p.joints)
      if (q.z() < p.lowest_point.z()) p.lowest_point = q;
    p.lowest_point.z() -= 0.07;

    double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
    for (const auto& [name, q] : p.joints) {
      const auto pr = project(s.camera, q);
      if (pr.behind) continue;
      x0 = std::min(x0, pr.pixel.x());
      y0 = std::min(y0, pr.pixel.y());
      x1 = std::max(x1, pr.pixel.x());
      y1 = std::max(y1, pr.pixel.y());
    }
    p.bbox = {x0 - 6.0, y0 - 10.0, x1 + 6.0, y1 + 4.0};
    s.players.push_back(std::move(p));
  }
  assign_player_labels(s);

  if (uniform(rng, 0.0, 1.0) < options.ball_present) {
    BallState b;
    const double bz = table ? spec.surface_height_m + uniform(rng, 0.02, 0.8) : uniform(rng, 0.05, 4.5);
    const double margin = table ? 0.4 : 1.5;
    b.position = Vec3(uniform(rng, -margin, L + margin), uniform(rng, -0.3 * margin, W + 0.3 * margin), bz);
    b.visible = uniform(rng, 0.0, 1.0) < options.ball_visible;
    s.ball = b;
  }
  return s;
}

std::vector<SceneState> synthetic_pool(const CourtRegistry& registry, std::span<const Sport> sports,
                                       std::size_t per_sport, std::uint64_t seed,
                                       const SyntheticSceneOptions& options) {
  std::vector<SceneState> out;
  out.reserve(sports.size() * per_sport);
  for (Sport sport : sports) {
    const auto& spec = registry.get(sport);
    for (std::size_t i = 0; i < per_sport; ++i) {
      char id[64];
      std::snprintf(id, sizeof id, "syn-%s-%05zu", std::string(to_string(sport)).c_str(), i);
      out.push_back(synthetic_scene(spec, mix_seed(seed, fnv1a64(id)), id, "000000", options));
    }
  }
  return out;
}

}  // namespace courtlab
