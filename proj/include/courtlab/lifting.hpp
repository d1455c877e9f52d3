#pragma once

#include "courtlab/camera.hpp"
#include "courtlab/common.hpp"

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace courtlab {

/// Back-projected pixel: origin at the camera center, unit direction with
/// positive camera-frame depth. The ray parameter is metric distance.
struct Ray {
  Vec3 origin;
  Vec3 direction;
  Vec2 source_pixel;

  [[nodiscard]] Vec3 at(double lambda) const { return origin + lambda * direction; }
};

Ray pixel_ray(const PinholeCamera& camera, const Vec2& pixel);
inline Vec3 eval_ray(const Ray& ray, double lambda) { return ray.at(lambda); }

struct PlaneHit {
  Vec3 point;
  double lambda = 0.0;
};

/// Intersection with the horizontal plane Z = z.
PlaneHit intersect_plane(const Ray& ray, double z);

struct ImageSegment {
  Vec2 a;
  Vec2 b;
  /// Single-pixel result (vertical ray); a == b.
  bool degenerate = false;
};

double point_segment_distance(const Vec2& p, const ImageSegment& s) noexcept;

/// Image of the ground-projection locus G(lambda) = (X.x, X.y, surface_z) of
/// the ball ray over [lambda_min, lambda_max].
ImageSegment projection_line(const PinholeCamera& camera, const Vec2& ball_pixel,
                             double lambda_min, double lambda_max, double surface_z);

struct AssistiveLine {
  ImageSegment segment;       // clipped to the image rectangle
  double lambda_min = 0.0;    // ray point just below the camera height
  double lambda_max = 0.0;    // ray point on the playing surface
  bool visible = true;        // false if nothing survives clipping
};

/// Rendering range for the annotation overlay: from the ray point 0.1 m
/// below camera height down to the playing surface, clipped to the image.
AssistiveLine assistive_line(const PinholeCamera& camera, const Vec2& ball_pixel, double surface_z);

inline constexpr double kInconsistentClickTolerance = 0.05;

struct LiftResult {
  Vec3 point;
  double lambda = 0.0;
  double residual_m = 0.0;
  Vec3 ground_point;  // where the ground click hits the surface
  bool inconsistent_click = false;
};

/// Recovers the 3D ball from its pixel and the clicked ground contact by
/// solving the ray depth against the contact's planar coordinates.
LiftResult lift_ball(const PinholeCamera& camera, const Vec2& ball_pixel, const Vec2& ground_click,
                     double surface_z, double tolerance_m = kInconsistentClickTolerance);

struct TrajectorySample {
  double t = 0.0;
  Vec3 point;
};

/// Constant-acceleration ball flight p(t) = p0 + v0 (t - t0) + a (t - t0)^2 / 2.
struct TrajectorySegment {
  double t0 = 0.0;
  double t_end = 0.0;
  Vec3 p0 = Vec3::Zero();
  Vec3 v0 = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();
  double frame_rate = 25.0;

  [[nodiscard]] Vec3 at(double t) const;
};

/// Exact fit through start, middle and end samples.
TrajectorySegment fit_trajectory(std::span<const TrajectorySample> samples, double frame_rate);

struct Detection {
  double t = 0.0;
  Vec2 pixel;
};

struct TrajectoryQuality {
  double mean_error_px = 0.0;
  std::vector<double> errors_px;
  bool pass = false;
};

TrajectoryQuality trajectory_quality(const TrajectorySegment& segment,
                                     std::span<const Detection> detections,
                                     const PinholeCamera& camera, double threshold_px = 5.0);

/// Player body from an external mesh-recovery tool, expressed in the world
/// frame. Joint names follow the SMPL-X convention ("pelvis", "left_hip"...).
struct PlayerMesh {
  std::string player_id;
  std::vector<Vec3> vertices;
  std::map<std::string, Vec3> joints;
  Vec2 facing = Vec2::UnitX();
  std::string source = "external";
};

/// Camera-frame vertices and joints to world frame using the scene camera.
PlayerMesh mesh_from_camera_frame(const PinholeCamera& camera, std::string player_id,
                                  std::span<const Vec3> vertices_cam,
                                  const std::map<std::string, Vec3>& joints_cam);

/// Facing in the playing plane: normalize((left_hip - right_hip) x up).
std::optional<Vec2> facing_from_joints(const std::map<std::string, Vec3>& joints);

struct RealignResult {
  PlayerMesh mesh;
  double scale = 1.0;
  std::size_t lowest_vertex = 0;
};

/// Moves the mesh along camera rays so its lowest vertex sits at
/// `annotated_height`: X' = s X + (1 - s) C.
RealignResult realign_mesh(const PinholeCamera& camera, const PlayerMesh& mesh,
                           double annotated_height, double surface_z = 0.0);

}  // namespace courtlab
