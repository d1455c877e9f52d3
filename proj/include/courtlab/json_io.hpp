#pragma once

#include "courtlab/calibration.hpp"
#include "courtlab/camera.hpp"
#include "courtlab/evaluation.hpp"
#include "courtlab/lifting.hpp"
#include "courtlab/qa_generation.hpp"
#include "courtlab/scene.hpp"
#include "courtlab/validation.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace courtlab {

using Json = nlohmann::json;

/// Payload validation failure naming the offending field ("clicks.far_left").
class FieldError : public Error {
 public:
  FieldError(std::string field, const std::string& message)
      : Error(ErrorCode::parse_error, field + ": " + message), field_(std::move(field)) {}
  [[nodiscard]] const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Field readers; all throw FieldError with `path` on a missing or
// malformed value.
const Json& field(const Json& obj, const std::string& key, const std::string& path);
double read_number(const Json& j, const std::string& path);
int read_int(const Json& j, const std::string& path);
std::string read_string(const Json& j, const std::string& path);
Vec2 read_vec2(const Json& j, const std::string& path);
Vec3 read_vec3(const Json& j, const std::string& path);

Json to_json(const Vec2& v);
Json to_json(const Vec3& v);

Json camera_to_json(const PinholeCamera& c);
PinholeCamera camera_from_json(const Json& j, const std::string& path = "camera");

Json fit_report_to_json(const FitReport& r);
Json trajectory_to_json(const TrajectorySegment& s);
TrajectorySegment trajectory_from_json(const Json& j, const std::string& path = "segment");

Json scene_to_json(const SceneState& s);
SceneState scene_from_json(const Json& j);

Json qa_item_to_json(const QAItem& item);
QAItem qa_item_from_json(const Json& j);
Json manifest_to_json(const DatasetManifest& m);
/// {subcategory: {sport: count}}; the same shape as the manifest's targets.
Json targets_to_json(const DistributionTargets& t);
DistributionTargets targets_from_json(const Json& j);

Json eval_report_to_json(const EvalReport& r, std::span<const QAItem> items);
Json error_report_to_json(const ErrorReport& r);

EngineRecord engine_record_from_json(const Json& j);

/// Multi-view oracle frame: {frame_id, sport, views: [{camera, ball?: [u,v],
/// joints?: {player_id: {joint: [u,v]}}}]}. Ball and joints are
/// triangulated from every view that carries them.
EngineRecord oracle_record_from_json(const Json& j);

/// Deterministic text form: two-space indent, sorted keys, trailing newline.
std::string dump_document(const Json& j);
/// One compact record per line.
std::string dump_line(const Json& j);

std::vector<Json> read_jsonl(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);
Json read_json_file(const std::filesystem::path& path);

std::vector<QAItem> read_qa_file(const std::filesystem::path& path);
void write_qa_file(const std::filesystem::path& path, std::span<const QAItem> items);
/// Prediction file: one {item_id, raw_text} per line.
std::vector<Prediction> read_predictions(const std::filesystem::path& path);

}  // namespace courtlab
