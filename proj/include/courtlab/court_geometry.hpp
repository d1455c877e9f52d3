#pragma once

#include "courtlab/common.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace courtlab {

enum class Sport { badminton, tennis, table_tennis, pickleball };

inline constexpr std::array<Sport, 4> kAllSports = {
    Sport::badminton, Sport::tennis, Sport::table_tennis, Sport::pickleball};

std::string_view to_string(Sport sport) noexcept;
/// Accepts the identifiers produced by to_string(Sport). Throws
/// ErrorCode::unsupported_sport otherwise.
Sport parse_sport(std::string_view name);

enum class Zone { forecourt, midcourt, backcourt };
enum class CourtHalf { far, near };

std::string_view to_string(Zone zone) noexcept;
std::string_view to_string(CourtHalf half) noexcept;

struct ZoneResult {
  Zone zone;
  CourtHalf half;
  /// Longitudinal distance to the closest band boundary that would change
  /// the zone label (service line or baseline).
  double boundary_margin_m;

  bool operator==(const ZoneResult&) const = default;
};

struct Segment2 {
  Vec2 a;
  Vec2 b;
};

struct CourtLine {
  std::string name;          // registry key, e.g. "far_baseline"
  std::string display_name;  // question text, e.g. "the far baseline"
  Segment2 segment;
};

/// Per-sport decision thresholds used to drop ambiguous QA items.
struct AmbiguityThresholds {
  double lateral_m = 0.15;
  double depth_m = 0.15;
  double camera_view_px = 8.0;
  double egocentric_sin = 0.08715574274765817;  // sin(5 deg)
  double center_line_m = 0.02;                  // "on the center line" band
};

/// Metric layout of one sport's playing area in the court-anchored frame:
/// origin at the far-left ground corner, X toward the camera along the
/// length, Z up, Y = Z x X (to the camera's right).
struct CourtSpec {
  Sport sport = Sport::badminton;
  std::string sport_name;  // used in the pre-prompt
  std::string ball_name;   // "the shuttlecock", ...
  std::string origin_phrase;
  std::string baseline_phrase;

  double length_m = 0.0;
  double width_m = 0.0;
  double net_height_post_m = 0.0;
  double net_height_center_m = 0.0;
  double surface_height_m = 0.0;
  /// Distance from the net to the service line that closes the forecourt.
  double service_line_from_net_m = 0.0;

  std::map<std::string, Vec3> keypoints;
  std::vector<CourtLine> lines;
  Segment2 center_line;
  AmbiguityThresholds ambiguity;

  [[nodiscard]] double half_length() const noexcept { return 0.5 * length_m; }
  [[nodiscard]] double net_top_center_z() const noexcept {
    return surface_height_m + net_height_center_m;
  }
  [[nodiscard]] const CourtLine& line(std::string_view name) const;
  [[nodiscard]] bool has_line(std::string_view name) const noexcept;
};

/// Ground corners in the fixed click order: far-left, far-right,
/// near-right, near-left. Net tops follow.
inline constexpr std::array<std::string_view, 4> kCornerNames = {
    "far_left", "far_right", "near_right", "near_left"};
inline constexpr std::array<std::string_view, 2> kNetNames = {"net_left_top", "net_right_top"};

/// Built-in layout for one sport (official doubles dimensions).
const CourtSpec& court_spec(Sport sport);

/// Rebuilds keypoints, lines and zones from the scalar dimensions. Throws
/// invalid_argument if the dimensions violate the layout invariants.
CourtSpec make_court_spec(Sport sport, double length_m, double width_m,
                          double net_height_post_m, double net_height_center_m,
                          double surface_height_m, double service_line_from_net_m);

/// Throws invalid_argument describing the first broken invariant.
void check_court_spec(const CourtSpec& spec);

inline constexpr double kDefaultOutOfBoundsMargin = 5.0;

ZoneResult zone_of(const Vec3& point, const CourtSpec& spec,
                   double out_of_bounds_margin_m = kDefaultOutOfBoundsMargin);

/// Perpendicular distance from the point's vertical projection to the
/// infinite line through the named segment.
double line_distance(const Vec3& point, std::string_view line_name, const CourtSpec& spec);
double point_line_distance_2d(const Vec2& p, const Segment2& line) noexcept;

/// Key-value court configuration ("key = value", '#' comments). The file must
/// carry format_version = 1 and a sport; dimensions default to the built-in
/// table and may be overridden individually.
CourtSpec parse_court_config(std::string_view text);
CourtSpec load_court_config(const std::filesystem::path& path);
std::string format_court_config(const CourtSpec& spec);

/// Sport -> layout lookup that starts from the built-ins and can be
/// overridden from configuration files.
class CourtRegistry {
 public:
  CourtRegistry();
  [[nodiscard]] const CourtSpec& get(Sport sport) const;
  void set(CourtSpec spec);
  void load(const std::filesystem::path& path);

 private:
  std::map<Sport, CourtSpec> specs_;
};

}  // namespace courtlab
