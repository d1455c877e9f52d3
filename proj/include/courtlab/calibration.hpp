#pragma once

#include "courtlab/camera.hpp"
#include "courtlab/common.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace courtlab {

/// One clicked court keypoint and its metric position.
struct Correspondence {
  std::string name;
  Vec2 image_point;
  Vec3 world_point;
};

/// Pairs clicks with the registry positions of `spec`. Throws unknown_line
/// style not_found errors for names that are not court keypoints.
std::vector<Correspondence> make_correspondences(
    const CourtSpec& spec, std::span<const std::pair<std::string, Vec2>> clicks);

struct PnpOptions {
  /// fx == fy and principal point at the image center.
  bool simplified = false;
  /// Keep (cx, cy) at the image center in full mode.
  bool fix_principal_point = true;
  /// Residual weight applied to off-plane (net) correspondences.
  double net_weight = 2.0;
  int max_iterations = 200;
  double step_tolerance = 1e-12;
  double cost_tolerance = 1e-14;
  /// Reprojection RMSE above this fails the calibration.
  double rmse_ceiling_px = 8.0;
};

struct FitReport {
  double rmse_px = 0.0;
  std::vector<double> residuals_px;  // per correspondence, input order
  int iterations = 0;
  bool converged = false;
  double initial_focal_px = 0.0;
  /// Weighted cost after the start and after every accepted step.
  std::vector<double> cost_history;
};

struct CalibrationResult {
  PinholeCamera camera;
  FitReport report;
};

/// Raised when refinement ends above the RMSE ceiling; carries the fit.
class CalibrationError : public Error {
 public:
  CalibrationError(const std::string& message, CalibrationResult result)
      : Error(ErrorCode::calibration_failed, message), result_(std::move(result)) {}
  [[nodiscard]] const CalibrationResult& result() const noexcept { return result_; }

 private:
  CalibrationResult result_;
};

/// Planar homography initialisation followed by damped Gauss-Newton
/// refinement of intrinsics and pose over all correspondences.
CalibrationResult solve_pnp(std::span<const Correspondence> correspondences, ImageSize image_size,
                            const PnpOptions& options = {});

/// Normalised DLT homography mapping ground-plane (X, Y) to pixels.
Mat3 estimate_homography(std::span<const Vec2> plane_points, std::span<const Vec2> image_points);

struct FocalError {
  double fx_percent = 0.0;
  double fy_percent = 0.0;
};

FocalError focal_error(const PinholeCamera& predicted, const PinholeCamera& ground_truth);

/// Dense per-pixel z-depth (meters), row-major, pixel (u, v) at data[v * width + u].
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  /// Bilinear sample; nullopt if a contributing sample is missing,
  /// non-positive or outside the map.
  [[nodiscard]] std::optional<double> sample(const Vec2& pixel) const;
};

/// Adjacent frame relative to the reference camera frame:
/// X_adj = rotation * X_ref + translation, plus the adjacent intrinsics.
struct AdjacentView {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
};

struct PropagatedKeypoint {
  std::optional<Vec2> pixel;
  std::string failure;  // empty on success
};

std::vector<PropagatedKeypoint> propagate_keypoints(std::span<const Vec2> ref_keypoints,
                                                    const DepthMap& ref_depth,
                                                    const PinholeCamera& ref_camera,
                                                    const AdjacentView& adjacent);

}  // namespace courtlab
