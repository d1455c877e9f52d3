#include "courtlab/templates.hpp"

#include <json.hpp>

#include <algorithm>
#include <set>

namespace courtlab {

namespace detail {
extern const std::string_view kEmbeddedTemplateManifest;
}

namespace {

constexpr std::array<std::string_view, kSubcategoryCount> kSubcategoryNames = {
    "camera_object", "height",        "object_line", "object_object", "ball_count",
    "player_count",  "localization",  "ball_zone",   "ball_player",   "camera_player",
    "player_zone",   "player_player", "player_line"};

constexpr std::array<std::string_view, kSubcategoryCount> kColumnLabels = {
    "Cam-Obj",  "Height",      "Obj-Line",   "Obj-Obj",     "Ball",          "Player",     "Loc",
    "Ball-Zone", "Ball-Player", "Cam-Player", "Player-Zone", "Player-Player", "Player-Line"};

constexpr std::array<std::string_view, 4> kCategoryNames = {
    "spatial_counting", "distance_measurement", "localization", "relational_reasoning"};

constexpr std::array<std::string_view, 4> kAnswerTypeNames = {"float_meters", "coordinate_3d",
                                                              "integer", "mcq"};

constexpr std::array<std::string_view, kQuestionTypeCount> kQuestionTypeNames = {
    "cam_obj_distance", "obj_obj_distance", "obj_line_distance", "height",
    "player_count",     "ball_visible",     "localization",      "pp_nearest",
    "pp_ego_side",      "pp_camera_side",   "ball_zone",         "ball_net_height",
    "bp_nearest",       "bp_ego_side",      "bp_camera_side",    "cp_nearest",
    "cp_ego_side",      "cp_camera_side",   "player_zone",       "pl_nearest"};

template <std::size_t N>
std::size_t index_of(const std::array<std::string_view, N>& names, std::string_view s,
                     const char* what) {
  for (std::size_t i = 0; i < N; ++i)
    if (names[i] == s) return i;
  throw Error(ErrorCode::parse_error, std::string("unknown ") + what + " '" + std::string(s) + "'");
}

// Placeholders each type may use. Every listed name must appear.
std::vector<std::string_view> required_placeholders(QuestionType t) {
  switch (t) {
    case QuestionType::cam_obj_distance:
    case QuestionType::height:
    case QuestionType::localization: return {"object"};
    case QuestionType::obj_obj_distance: return {"object1", "object2"};
    case QuestionType::obj_line_distance: return {"object", "line"};
    case QuestionType::player_count:
    case QuestionType::cp_nearest: return {};
    case QuestionType::ball_visible:
    case QuestionType::ball_zone:
    case QuestionType::ball_net_height:
    case QuestionType::bp_nearest: return {"ball"};
    case QuestionType::pp_nearest:
    case QuestionType::cp_ego_side:
    case QuestionType::cp_camera_side:
    case QuestionType::player_zone: return {"player"};
    case QuestionType::pp_ego_side:
    case QuestionType::pp_camera_side: return {"player1", "player2"};
    case QuestionType::bp_ego_side:
    case QuestionType::bp_camera_side: return {"player", "ball"};
    case QuestionType::pl_nearest: return {"line"};
  }
  return {};
}

const std::set<std::string_view> kOptionalPlaceholders = {"surface", "surface_region"};

}  // namespace

std::string_view to_string(Category c) noexcept { return kCategoryNames[static_cast<int>(c)]; }
std::string_view to_string(Subcategory s) noexcept { return kSubcategoryNames[static_cast<int>(s)]; }
std::string_view to_string(AnswerType t) noexcept { return kAnswerTypeNames[static_cast<int>(t)]; }
std::string_view to_string(QuestionType t) noexcept {
  return kQuestionTypeNames[static_cast<int>(t)];
}
std::string_view column_label(Subcategory s) noexcept { return kColumnLabels[static_cast<int>(s)]; }

Category parse_category(std::string_view s) {
  return static_cast<Category>(index_of(kCategoryNames, s, "category"));
}
Subcategory parse_subcategory(std::string_view s) {
  return static_cast<Subcategory>(index_of(kSubcategoryNames, s, "subcategory"));
}
AnswerType parse_answer_type(std::string_view s) {
  return static_cast<AnswerType>(index_of(kAnswerTypeNames, s, "answer type"));
}
QuestionType parse_question_type(std::string_view s) {
  return static_cast<QuestionType>(index_of(kQuestionTypeNames, s, "question type"));
}

Subcategory subcategory_of(QuestionType t) noexcept {
  switch (t) {
    case QuestionType::cam_obj_distance: return Subcategory::camera_object;
    case QuestionType::obj_obj_distance: return Subcategory::object_object;
    case QuestionType::obj_line_distance: return Subcategory::object_line;
    case QuestionType::height: return Subcategory::height;
    case QuestionType::player_count: return Subcategory::player_count;
    case QuestionType::ball_visible: return Subcategory::ball_count;
    case QuestionType::localization: return Subcategory::localization;
    case QuestionType::pp_nearest:
    case QuestionType::pp_ego_side:
    case QuestionType::pp_camera_side: return Subcategory::player_player;
    case QuestionType::ball_zone:
    case QuestionType::ball_net_height: return Subcategory::ball_zone;
    case QuestionType::bp_nearest:
    case QuestionType::bp_ego_side:
    case QuestionType::bp_camera_side: return Subcategory::ball_player;
    case QuestionType::cp_nearest:
    case QuestionType::cp_ego_side:
    case QuestionType::cp_camera_side: return Subcategory::camera_player;
    case QuestionType::player_zone: return Subcategory::player_zone;
    case QuestionType::pl_nearest: return Subcategory::player_line;
  }
  return Subcategory::camera_object;
}

Category category_of(Subcategory s) noexcept {
  switch (s) {
    case Subcategory::camera_object:
    case Subcategory::height:
    case Subcategory::object_line:
    case Subcategory::object_object: return Category::distance_measurement;
    case Subcategory::ball_count:
    case Subcategory::player_count: return Category::spatial_counting;
    case Subcategory::localization: return Category::localization;
    default: return Category::relational_reasoning;
  }
}

AnswerType answer_type_of(QuestionType t) noexcept {
  switch (t) {
    case QuestionType::cam_obj_distance:
    case QuestionType::obj_obj_distance:
    case QuestionType::obj_line_distance:
    case QuestionType::height: return AnswerType::float_meters;
    case QuestionType::player_count: return AnswerType::integer;
    case QuestionType::localization: return AnswerType::coordinate_3d;
    default: return AnswerType::mcq;
  }
}

bool uses_player_options(QuestionType t) noexcept {
  return t == QuestionType::pp_nearest || t == QuestionType::bp_nearest ||
         t == QuestionType::cp_nearest || t == QuestionType::pl_nearest;
}

bool QuestionTemplate::applies_to(Sport sport) const {
  if (type == QuestionType::player_zone && sport == Sport::table_tennis) return false;
  return sports.empty() || std::find(sports.begin(), sports.end(), sport) != sports.end();
}

const QuestionTemplate& TemplateManifest::get(std::string_view id) const {
  for (const auto& t : templates)
    if (t.id == id) return t;
  throw Error(ErrorCode::not_found, "unknown template '" + std::string(id) + "'");
}

const std::vector<OptionChoice>& TemplateManifest::options(std::string_view set) const {
  auto it = option_sets.find(std::string(set));
  if (it == option_sets.end())
    throw Error(ErrorCode::not_found, "unknown option set '" + std::string(set) + "'");
  return it->second;
}

std::vector<std::string> placeholders_in(std::string_view text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = text.find('{', pos)) != std::string_view::npos) {
    const auto end = text.find('}', pos);
    if (end == std::string_view::npos)
      throw Error(ErrorCode::parse_error, "unterminated placeholder in '" + std::string(text) + "'");
    out.emplace_back(text.substr(pos + 1, end - pos - 1));
    pos = end + 1;
  }
  return out;
}

TemplateManifest parse_template_manifest(std::string_view json_text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("template manifest: ") + e.what());
  }

  TemplateManifest m;
  try {
    m.format_version = doc.at("format_version").get<int>();
    if (m.format_version != 1)
      throw Error(ErrorCode::parse_error, "unsupported template manifest version " +
                                              std::to_string(m.format_version));

    for (const auto& [name, entries] : doc.at("option_sets").items()) {
      auto& set = m.option_sets[name];
      std::set<std::string> keys;
      for (const auto& e : entries) {
        set.push_back({e.at("key").get<std::string>(), e.at("text").get<std::string>()});
        if (!keys.insert(set.back().key).second)
          throw Error(ErrorCode::parse_error, "option set " + name + ": duplicate key " + set.back().key);
      }
      if (set.size() < 2 || set.size() > 4)
        throw Error(ErrorCode::parse_error, "option set " + name + " must have 2-4 entries");
    }

    std::set<std::string> ids;
    for (const auto& t : doc.at("templates")) {
      QuestionTemplate q;
      q.id = t.at("id").get<std::string>();
      q.type = parse_question_type(t.at("type").get<std::string>());
      q.text = t.at("text").get<std::string>();
      q.option_set = t.value("options", std::string{});
      if (t.contains("sports"))
        for (const auto& s : t.at("sports")) q.sports.push_back(parse_sport(s.get<std::string>()));

      const std::string where = "template " + q.id + ": ";
      if (!ids.insert(q.id).second) throw Error(ErrorCode::parse_error, where + "duplicate id");

      const bool needs_set = answer_type_of(q.type) == AnswerType::mcq && !uses_player_options(q.type);
      if (needs_set) {
        if (q.option_set.empty()) throw Error(ErrorCode::parse_error, where + "missing option set");
        if (!m.option_sets.count(q.option_set))
          throw Error(ErrorCode::parse_error, where + "unknown option set " + q.option_set);
      } else if (!q.option_set.empty()) {
        throw Error(ErrorCode::parse_error, where + "option set not allowed for this type");
      }

      const auto required = required_placeholders(q.type);
      const auto used = placeholders_in(q.text);
      for (const auto& name : used) {
        const bool known = std::find(required.begin(), required.end(), name) != required.end() ||
                           kOptionalPlaceholders.count(name);
        if (!known) throw Error(ErrorCode::parse_error, where + "unexpected placeholder {" + name + "}");
      }
      for (const auto& name : required)
        if (std::find(used.begin(), used.end(), name) == used.end())
          throw Error(ErrorCode::parse_error, where + "missing placeholder {" + std::string(name) + "}");

      m.templates.push_back(std::move(q));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("template manifest: ") + e.what());
  }
  return m;
}

const TemplateManifest& default_template_manifest() {
  static const TemplateManifest manifest = parse_template_manifest(detail::kEmbeddedTemplateManifest);
  return manifest;
}

std::string_view post_prompt(AnswerType t) noexcept {
  switch (t) {
    case AnswerType::float_meters: return kFloatPostPrompt;
    case AnswerType::coordinate_3d: return kCoordinatePostPrompt;
    case AnswerType::integer: return kIntegerPostPrompt;
    case AnswerType::mcq: return kMcqPostPrompt;
  }
  return {};
}

std::string pre_prompt(const CourtSpec& spec) {
  return "This is a snapshot from a " + spec.sport_name +
         " match view from a high angle. The court closer to the camera is the 'near court', and "
         "the opposite one is the 'far court'. All references to 'left' or 'right' in the "
         "questions describing the court or relative positions are based on the camera's "
         "perspective, corresponding to the left and right sides of the image frame. However, "
         "references to specific body parts (e.g., 'left wrist','right knee') follow the "
         "player's anatomical perspective (the player's own left/right).";
}

std::string localization_preamble(const CourtSpec& spec) {
  return "Using a coordinate system where the origin (0,0,0) is " + spec.origin_phrase +
         ". The X-axis extends along the sideline towards the camera, the Y-axis extends along " +
         spec.baseline_phrase + " to the right, and the Z-axis is vertical.";
}

}  // namespace courtlab
