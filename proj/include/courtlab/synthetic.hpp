#pragma once

#include "courtlab/camera.hpp"
#include "courtlab/court_geometry.hpp"
#include "courtlab/scene.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace courtlab {

/// Uniform double in [lo, hi) from the top 53 bits of one draw.
double uniform(std::mt19937_64& rng, double lo, double hi);

struct BroadcastCameraRange {
  double elevation_min_deg = 15.0;
  double elevation_max_deg = 45.0;
  double range_min_m = 8.0;
  double range_max_m = 40.0;
  double azimuth_max_deg = 20.0;
  /// Fraction of the half-frame the farthest keypoint may reach.
  double fill = 0.85;
  /// Keypoints must sit at least this far in front of the camera.
  double min_depth_m = 1.0;
  ImageSize image{1920, 1080};
};

/// Elevated camera behind the near baseline looking at the court center.
/// Placements that put any court keypoint closer than min_depth_m are
/// redrawn. fx = fy, principal point at the image center, focal chosen so
/// the keypoints fill the frame.
PinholeCamera random_broadcast_camera(const CourtSpec& spec, std::mt19937_64& rng,
                                      const BroadcastCameraRange& range = {});

struct SyntheticSceneOptions {
  int min_players = 2;
  int max_players = 4;
  double ball_present = 0.9;
  double ball_visible = 0.9;
  BroadcastCameraRange camera;
};

/// Random but plausible frame: players with joint sets and facing, an
/// optional ball, and a broadcast camera. Labels are assigned.
SceneState synthetic_scene(const CourtSpec& spec, std::uint64_t seed, std::string scene_id,
                           std::string frame_id = "000000",
                           const SyntheticSceneOptions& options = {});

/// `per_sport` scenes for each sport, scene ids "syn-<sport>-<index>".
std::vector<SceneState> synthetic_pool(const CourtRegistry& registry, std::span<const Sport> sports,
                                       std::size_t per_sport, std::uint64_t seed,
                                       const SyntheticSceneOptions& options = {});

/// Player joints around a pelvis, laid out for the given facing angle.
std::map<std::string, Vec3> synthetic_joints(const Vec3& pelvis, double facing_rad,
                                             std::mt19937_64& rng);

}  // namespace courtlab
