#include "courtlab/scene.hpp"

#include <algorithm>
#include <charconv>
#include <set>

namespace courtlab {

void assign_player_labels(SceneState& scene) {
  std::vector<std::size_t> order(scene.players.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& pa = scene.players[a];
    const auto& pb = scene.players[b];
    if (pa.bbox.x0 != pb.bbox.x0) return pa.bbox.x0 < pb.bbox.x0;
    return pa.player_id < pb.player_id;
  });
  for (std::size_t rank = 0; rank < order.size(); ++rank)
    scene.players[order[rank]].label = static_cast<int>(rank) + 1;
}

void check_scene(const SceneState& scene) {
  std::set<int> labels;
  for (const auto& p : scene.players) {
    if (p.label <= 0)
      throw Error(ErrorCode::invalid_argument, "player " + p.player_id + " has no label");
    if (!labels.insert(p.label).second)
      throw Error(ErrorCode::invalid_argument,
                  "duplicate player label " + std::to_string(p.label));
  }
  if (scene.ball && scene.ball->visible && !scene.ball->position)
    throw Error(ErrorCode::invalid_argument, "visible ball without a position");
}

const PlayerState* find_player(const SceneState& scene, int label) noexcept {
  for (const auto& p : scene.players)
    if (p.label == label) return &p;
  return nullptr;
}

std::string to_string(const EntityRef& ref) {
  switch (ref.kind) {
    case EntityRef::Kind::camera: return "camera";
    case EntityRef::Kind::ball: return "ball";
    case EntityRef::Kind::player: return "player:" + std::to_string(ref.player);
    case EntityRef::Kind::joint: return "player:" + std::to_string(ref.player) + ":" + ref.joint;
  }
  return {};
}

EntityRef parse_entity(std::string_view text) {
  if (text == "camera") return EntityRef::camera();
  if (text == "ball") return EntityRef::ball();
  constexpr std::string_view prefix = "player:";
  if (text.substr(0, prefix.size()) == prefix) {
    auto rest = text.substr(prefix.size());
    const auto colon = rest.find(':');
    const auto digits = rest.substr(0, colon);
    int label = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), label);
    if (ec == std::errc{} && ptr == digits.data() + digits.size() && label > 0) {
      if (colon == std::string_view::npos) return EntityRef::of_player(label);
      const auto joint = rest.substr(colon + 1);
      if (!joint.empty()) return EntityRef::of_joint(label, std::string(joint));
    }
  }
  throw Error(ErrorCode::parse_error, "bad entity reference '" + std::string(text) + "'");
}

std::string describe(const EntityRef& ref, const CourtSpec& spec) {
  switch (ref.kind) {
    case EntityRef::Kind::camera: return "the camera";
    case EntityRef::Kind::ball: return spec.ball_name;
    case EntityRef::Kind::player: return "Player " + std::to_string(ref.player);
    case EntityRef::Kind::joint: {
      std::string name = ref.joint;
      std::replace(name.begin(), name.end(), '_', ' ');
      return "the " + name + " of Player " + std::to_string(ref.player);
    }
  }
  return {};
}

Vec3 entity_position(const SceneState& scene, const EntityRef& ref) {
  switch (ref.kind) {
    case EntityRef::Kind::camera:
      return scene.camera.center();
    case EntityRef::Kind::ball:
      if (!scene.ball || !scene.ball->position)
        throw Error(ErrorCode::missing_entity, "scene has no ball position");
      return *scene.ball->position;
    case EntityRef::Kind::player:
    case EntityRef::Kind::joint: {
      const auto* p = find_player(scene, ref.player);
      if (!p) throw Error(ErrorCode::missing_entity, "no Player " + std::to_string(ref.player));
      if (ref.kind == EntityRef::Kind::player) return p->pelvis;
      auto it = p->joints.find(ref.joint);
      if (it == p->joints.end())
        throw Error(ErrorCode::missing_entity,
                    "Player " + std::to_string(ref.player) + " has no joint " + ref.joint);
      return it->second;
    }
  }
  throw Error(ErrorCode::missing_entity, "unknown entity kind");
}

std::vector<int> visible_players(const SceneState& scene) {
  std::vector<int> out;
  const auto& size = scene.camera.image_size;
  for (const auto& p : scene.players) {
    const auto pr = project(scene.camera, p.pelvis);
    if (pr.behind) continue;
    if (pr.pixel.x() < 0 || pr.pixel.y() < 0 || pr.pixel.x() >= size.width ||
        pr.pixel.y() >= size.height)
      continue;
    out.push_back(p.label);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace courtlab
