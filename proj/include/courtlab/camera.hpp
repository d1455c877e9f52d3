#pragma once

#include "courtlab/common.hpp"
#include "courtlab/court_geometry.hpp"

#include <span>
#include <vector>

namespace courtlab {

struct ImageSize {
  int width = 0;
  int height = 0;

  [[nodiscard]] Vec2 center() const noexcept { return {0.5 * width, 0.5 * height}; }
  [[nodiscard]] double diagonal() const noexcept;
  bool operator==(const ImageSize&) const = default;
};

/// World-to-pixel pinhole camera without lens distortion. `rotation` and
/// `translation` map world meters into the camera frame (x right, y down,
/// z forward).
struct PinholeCamera {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  ImageSize image_size;

  [[nodiscard]] Mat3 intrinsics() const;
  [[nodiscard]] Vec3 center() const { return -rotation.transpose() * translation; }
  [[nodiscard]] Vec3 to_camera(const Vec3& world) const { return rotation * world + translation; }
  /// Unit optical axis in world coordinates.
  [[nodiscard]] Vec3 optical_axis() const { return rotation.row(2).transpose(); }

  /// Camera looking from `eye` toward `target` with the image y axis pointing
  /// as close to world -Z as possible.
  static PinholeCamera look_at(const Vec3& eye, const Vec3& target, double fx, double fy,
                               double cx, double cy, ImageSize size);
};

struct Projection {
  Vec2 pixel;
  double depth = 0.0;
  bool behind = false;  // depth <= 0; pixel is not meaningful
};

Projection project(const PinholeCamera& camera, const Vec3& world);

/// Batched projection through the SIMD kernels. Points with non-positive
/// camera depth are flagged, never clamped.
std::vector<Projection> reproject(const PinholeCamera& camera, std::span<const Vec3> world_points);

/// Throws invalid_geometry describing the first violated invariant: rotation
/// orthonormal with det +1 (1e-9), positive focals, camera above the
/// playing surface, court keypoints in front of the camera.
void check_camera(const PinholeCamera& camera, const CourtSpec& spec);

}  // namespace courtlab
