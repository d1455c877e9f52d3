#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <stdexcept>
#include <string>
#include <string_view>

namespace courtlab {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Failure categories shared by every module. The CLI and the HTTP service
/// map these onto exit codes and status codes.
enum class ErrorCode {
  unsupported_sport,
  out_of_play,
  unknown_line,
  insufficient_correspondences,
  degenerate_geometry,
  calibration_failed,
  no_intersection,
  behind_camera,
  non_increasing_times,
  ill_conditioned,
  invalid_geometry,
  empty_input,
  missing_entity,
  invalid_argument,
  mismatched_joints,
  duplicate_prediction,
  parse_error,
  not_found,
  conflict,
  io_error,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace courtlab
