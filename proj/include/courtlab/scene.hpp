#pragma once

#include "courtlab/camera.hpp"
#include "courtlab/common.hpp"
#include "courtlab/court_geometry.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace courtlab {

struct BBox {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
};

struct PlayerState {
  std::string player_id;
  int label = 0;  // "Player <label>" in question text
  BBox bbox;
  Vec3 pelvis = Vec3::Zero();
  Vec2 facing = Vec2::UnitX();
  std::map<std::string, Vec3> joints;
  Vec3 lowest_point = Vec3::Zero();
};

struct BallState {
  std::optional<Vec3> position;
  bool visible = false;
};

/// One frame's reconstructed world in the court frame.
struct SceneState {
  std::string scene_id;
  std::string frame_id;
  Sport sport = Sport::badminton;
  PinholeCamera camera;
  std::optional<BallState> ball;
  std::vector<PlayerState> players;
};

/// Labels players 1..N by ascending bbox left edge (ties by player_id).
void assign_player_labels(SceneState& scene);

/// Throws invalid_argument on duplicate labels or a visible ball without
/// a position.
void check_scene(const SceneState& scene);

const PlayerState* find_player(const SceneState& scene, int label) noexcept;

/// Entity named in a question: the camera, the ball, a player (pelvis) or
/// one of a player's joints. Text form: "camera", "ball", "player:2",
/// "player:2:left_wrist".
struct EntityRef {
  enum class Kind { camera, ball, player, joint };
  Kind kind = Kind::ball;
  int player = 0;
  std::string joint;

  static EntityRef camera() { return {Kind::camera, 0, {}}; }
  static EntityRef ball() { return {Kind::ball, 0, {}}; }
  static EntityRef of_player(int label) { return {Kind::player, label, {}}; }
  static EntityRef of_joint(int label, std::string name) { return {Kind::joint, label, std::move(name)}; }

  bool operator==(const EntityRef&) const = default;
};

std::string to_string(const EntityRef& ref);
EntityRef parse_entity(std::string_view text);

/// Question-text phrase: "the camera", "the shuttlecock", "Player 2",
/// "the left wrist of Player 2".
std::string describe(const EntityRef& ref, const CourtSpec& spec);

/// World position; throws missing_entity if the scene lacks it.
Vec3 entity_position(const SceneState& scene, const EntityRef& ref);

/// Players whose pelvis projects in front of the camera and inside the image.
std::vector<int> visible_players(const SceneState& scene);

}  // namespace courtlab
