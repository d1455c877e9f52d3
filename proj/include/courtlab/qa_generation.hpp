#pragma once

#include "courtlab/common.hpp"
#include "courtlab/court_geometry.hpp"
#include "courtlab/scene.hpp"
#include "courtlab/templates.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace courtlab {

/// double: meters; Vec3: court-frame coordinate; long long: count;
/// string: option key for MCQ answers ("left", "player:3", ...).
using AnswerValue = std::variant<double, Vec3, long long, std::string>;

/// Entities bound to a question's placeholders.
struct QueryParams {
  std::optional<EntityRef> a;  // {object}, {object1}, {player}, {player1}
  std::optional<EntityRef> b;  // {object2}, {player2}, or the ball for ball-player types
  std::string line;            // court line registry name
};

struct DerivedAnswer {
  AnswerValue value;
  double margin = std::numeric_limits<double>::infinity();
  bool ambiguous = false;
  /// Quantities the rule looked at, e.g. ("player:2", 3.41).
  std::vector<std::pair<std::string, double>> distances;
  /// Eligible option entities for player-option types, ascending label.
  std::vector<int> candidates;
};

/// Ground truth for one question type. Throws missing_entity if a bound
/// entity is absent and invalid_argument if the type needs something the
/// params or sport do not provide.
DerivedAnswer derive_answer(const SceneState& scene, const CourtSpec& spec, QuestionType type,
                            const QueryParams& params);

struct McqOption {
  std::string letter;
  std::string text;
  std::string key;
};

using GroundTruth = std::variant<double, Vec3, long long, std::string>;

struct QAMeta {
  std::string template_id;
  std::uint64_t rng_seed = 0;
  QuestionType question_type = QuestionType::cam_obj_distance;
  std::vector<std::string> entities;  // bound refs in placeholder order
  std::string line;
  std::string answer_key;  // MCQ only
  double margin = 0.0;
  std::vector<std::pair<std::string, double>> distances;
  std::optional<double> ratio_3d_2d;  // m/px; +inf when projections coincide
  std::map<std::string, int> player_labels;  // player_id -> label
  std::vector<std::string> flags;
};

struct QAItem {
  std::string id;
  std::string scene_id;
  std::string frame_id;
  Sport sport = Sport::badminton;
  Category category = Category::distance_measurement;
  Subcategory subcategory = Subcategory::camera_object;
  std::string question_text;
  AnswerType answer_type = AnswerType::float_meters;
  GroundTruth ground_truth;
  std::vector<McqOption> options;
  QAMeta meta;
};

/// Outcome of filling one template on one scene. Exactly one of `item` or
/// `skip_reason` is set.
struct InstantiateResult {
  std::optional<QAItem> item;
  std::string skip_reason;
};

/// Binds entities by seed, derives the answer, drops ambiguous bindings
/// and assembles pre-prompt, question, options and post-prompt. The item id
/// is left empty.
InstantiateResult instantiate(const QuestionTemplate& tmpl, const SceneState& scene,
                              const CourtSpec& spec, const TemplateManifest& manifest,
                              std::uint64_t rng_seed);

/// Same as instantiate with caller-chosen bindings. `option_seed` orders
/// the options.
InstantiateResult instantiate_with(const QuestionTemplate& tmpl, const SceneState& scene,
                                   const CourtSpec& spec, const TemplateManifest& manifest,
                                   const QueryParams& params, std::uint64_t option_seed);

/// 3D distance over the pixel distance between the entities' projections
/// (for lines: to the projected line segment). +inf if the projections
/// coincide. Only for object-object and object-line items.
double ambiguity_ratio(const QAItem& item, const SceneState& scene, const CourtSpec& spec);

struct DistributionTargets {
  std::map<Subcategory, std::map<Sport, int>> counts;

  [[nodiscard]] int total() const;
  [[nodiscard]] int get(Subcategory s, Sport sport) const;
  /// Per-sport benchmark counts (badminton, tennis, table tennis).
  static DistributionTargets bench();
};

struct DatasetManifest {
  std::string split;
  std::uint64_t seed = 0;
  std::map<Subcategory, std::map<Sport, int>> targets;
  std::map<Subcategory, std::map<Sport, int>> achieved;
  std::vector<std::string> scene_ids;
  std::string split_rule;
  std::size_t pool_scenes = 0;
  std::size_t template_count = 0;

  [[nodiscard]] int total() const;
  [[nodiscard]] int shortfall(Subcategory s, Sport sport) const;
};

struct GeneratedDataset {
  std::vector<QAItem> items;
  DatasetManifest manifest;
};

struct GenerateOptions {
  std::uint64_t seed = 0;
  std::string split = "bench";
  std::string split_rule = "all scenes";
  /// Worker threads for the per-scene pass; output does not depend on it.
  unsigned threads = 1;
};

/// Seeded sampling over (scene x template) pairs. Ambiguous pairs are
/// dropped first; each (subcategory, sport) bucket is then shuffled and cut
/// to its target. Throws empty_input for an empty pool.
GeneratedDataset generate_dataset(std::span<const SceneState> scenes,
                                  const DistributionTargets& targets, const GenerateOptions& options,
                                  const CourtRegistry& registry = CourtRegistry{},
                                  const TemplateManifest& manifest = default_template_manifest());

struct SceneSplit {
  std::vector<std::string> train;
  std::vector<std::string> bench;
  std::string rule;
};

/// Scene-level split: every frame of a scene lands in the same side.
SceneSplit split_scenes(std::span<const std::string> scene_ids, double bench_fraction,
                        std::uint64_t seed);

inline constexpr std::array<Sport, 3> kBenchSports = {Sport::badminton, Sport::tennis,
                                                     Sport::table_tennis};

/// Number of distinct question strings (without options) the manifest can
/// produce over `sports` for scenes with `max_players` players, each
/// carrying every question joint.
std::size_t template_cross_product(const TemplateManifest& manifest, const CourtRegistry& registry,
                                   std::span<const Sport> sports = kBenchSports,
                                   int max_players = 4);

/// Joints that questions may name besides the pelvis.
std::span<const std::string_view> question_joints() noexcept;

std::uint64_t fnv1a64(std::string_view s) noexcept;
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept;

}  // namespace courtlab
