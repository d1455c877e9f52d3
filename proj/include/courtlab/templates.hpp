#pragma once

#include "courtlab/common.hpp"
#include "courtlab/court_geometry.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace courtlab {

enum class Category { spatial_counting, distance_measurement, localization, relational_reasoning };

// Report column order.
enum class Subcategory {
  camera_object,
  height,
  object_line,
  object_object,
  ball_count,
  player_count,
  localization,
  ball_zone,
  ball_player,
  camera_player,
  player_zone,
  player_player,
  player_line,
};

inline constexpr std::size_t kSubcategoryCount = 13;
inline constexpr std::array<Subcategory, kSubcategoryCount> kAllSubcategories = {
    Subcategory::camera_object, Subcategory::height,        Subcategory::object_line,
    Subcategory::object_object, Subcategory::ball_count,    Subcategory::player_count,
    Subcategory::localization,  Subcategory::ball_zone,     Subcategory::ball_player,
    Subcategory::camera_player, Subcategory::player_zone,   Subcategory::player_player,
    Subcategory::player_line};

enum class AnswerType { float_meters, coordinate_3d, integer, mcq };

enum class QuestionType {
  cam_obj_distance,
  obj_obj_distance,
  obj_line_distance,
  height,
  player_count,
  ball_visible,
  localization,
  pp_nearest,
  pp_ego_side,
  pp_camera_side,
  ball_zone,
  ball_net_height,
  bp_nearest,
  bp_ego_side,
  bp_camera_side,
  cp_nearest,
  cp_ego_side,
  cp_camera_side,
  player_zone,
  pl_nearest,
};

inline constexpr std::size_t kQuestionTypeCount = 20;

std::string_view to_string(Category c) noexcept;
std::string_view to_string(Subcategory s) noexcept;
std::string_view to_string(AnswerType t) noexcept;
std::string_view to_string(QuestionType t) noexcept;
/// Short column header for text tables.
std::string_view column_label(Subcategory s) noexcept;

Category parse_category(std::string_view s);
Subcategory parse_subcategory(std::string_view s);
AnswerType parse_answer_type(std::string_view s);
QuestionType parse_question_type(std::string_view s);

Subcategory subcategory_of(QuestionType t) noexcept;
Category category_of(Subcategory s) noexcept;
AnswerType answer_type_of(QuestionType t) noexcept;
/// Player options are built per scene rather than read from an option set.
bool uses_player_options(QuestionType t) noexcept;

struct OptionChoice {
  std::string key;   // derived-answer key, e.g. "left", "forecourt"
  std::string text;  // printed option text
};

struct QuestionTemplate {
  std::string id;
  QuestionType type;
  std::string text;
  std::string option_set;     // empty for non-MCQ and player-option types
  std::vector<Sport> sports;  // empty: every sport

  [[nodiscard]] bool applies_to(Sport sport) const;
};

/// Editable template inventory (data/templates.json). The default manifest
/// is embedded in the library at build time.
struct TemplateManifest {
  int format_version = 1;
  std::map<std::string, std::vector<OptionChoice>> option_sets;
  std::vector<QuestionTemplate> templates;

  [[nodiscard]] const QuestionTemplate& get(std::string_view id) const;
  [[nodiscard]] const std::vector<OptionChoice>& options(std::string_view set) const;
};

/// Parses and validates a manifest: known types, unique ids, option sets
/// present where the type needs them, only known placeholders.
TemplateManifest parse_template_manifest(std::string_view json_text);
const TemplateManifest& default_template_manifest();

/// Names inside {braces}, in order of appearance.
std::vector<std::string> placeholders_in(std::string_view text);

inline constexpr std::string_view kFloatPostPrompt =
    "Answer with a single float number representing meters. Example: 2.54";
inline constexpr std::string_view kCoordinatePostPrompt =
    "Answer strictly in the format (x, y, z) with no units. Example: (1.2, 3.4, 0.0)";
inline constexpr std::string_view kIntegerPostPrompt =
    "Answer with a single integer number. Example: 3";
inline constexpr std::string_view kMcqPostPrompt =
    "Select the best option. Output only the single uppercase letter corresponding to the choice. "
    "Example: B";

std::string_view post_prompt(AnswerType t) noexcept;
std::string pre_prompt(const CourtSpec& spec);
/// Coordinate-system sentence that precedes localization questions.
std::string localization_preamble(const CourtSpec& spec);

}  // namespace courtlab
