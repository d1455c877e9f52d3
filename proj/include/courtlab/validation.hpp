#pragma once

#include "courtlab/camera.hpp"
#include "courtlab/common.hpp"
#include "courtlab/court_geometry.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace courtlab {

struct ViewObservation {
  PinholeCamera camera;
  Vec2 pixel;
};

struct Triangulation {
  Vec3 point;
  double residual_m = 0.0;  // RMS point-to-ray distance
  double max_ray_angle_deg = 0.0;
  bool ill_conditioned = false;  // every ray pair closer than 0.5 deg
};

inline constexpr double kMinTriangulationAngleDeg = 0.5;

/// Point minimising the summed squared distance to the back-projected rays.
/// Throws insufficient_correspondences for fewer than two views and
/// degenerate_geometry for coincident camera centers.
Triangulation triangulate(std::span<const ViewObservation> views);

using JointSet = std::map<std::string, Vec3>;

/// Mean per-joint Euclidean error in meters. With `root_aligned`, both sets
/// are first translated so their `root` joints coincide. Throws
/// mismatched_joints when the name sets differ.
double mpjpe(const JointSet& predicted, const JointSet& ground_truth, bool root_aligned = false,
             const std::string& root = "pelvis");

/// One frame's engine output or its oracle counterpart.
struct EngineRecord {
  std::string frame_id;
  Sport sport = Sport::badminton;
  std::optional<PinholeCamera> camera;
  std::optional<Vec3> ball;
  std::map<std::string, JointSet> players;  // player_id -> joints
};

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
};

Summary summarize(std::vector<double> values);

struct ErrorStats {
  Summary focal_fx_pct;
  Summary focal_fy_pct;
  Summary ball_x_cm;
  Summary ball_y_cm;
  Summary ball_z_cm;
  Summary pelvis_cm;
  Summary mpjpe_cm;
  std::size_t records = 0;
};

struct ErrorReport {
  ErrorStats overall;
  std::map<Sport, ErrorStats> per_sport;
};

/// Matches records by frame id. Throws empty_input when nothing matches.
ErrorReport engine_error_report(std::span<const EngineRecord> engine,
                                std::span<const EngineRecord> oracle);

std::string format_error_report(const ErrorReport& report);

}  // namespace courtlab
