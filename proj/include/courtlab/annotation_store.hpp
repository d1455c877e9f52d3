#pragma once

#include "courtlab/json_io.hpp"

#include <filesystem>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

namespace courtlab {

inline constexpr int kDocumentSchemaVersion = 1;

/// Per-scene annotation documents stored as <root>/<scene_id>.json. Every
/// document carries "schema_version" and a "version" counter used for
/// optimistic concurrency: a write names the version it was based on and
/// fails with ErrorCode::conflict if the stored one moved on.
class AnnotationStore {
 public:
  explicit AnnotationStore(std::filesystem::path root);

  [[nodiscard]] const std::filesystem::path& root() const noexcept { return root_; }
  [[nodiscard]] std::vector<std::string> list_scenes() const;
  [[nodiscard]] bool exists(const std::string& scene_id) const;

  /// Throws not_found.
  [[nodiscard]] Json read(const std::string& scene_id) const;
  [[nodiscard]] std::string read_text(const std::string& scene_id) const;

  /// Stores `doc` as version base_version + 1. base_version 0 creates a new
  /// document. A document equal to the stored one is not rewritten and
  /// keeps its version. Returns the resulting version.
  int write(const std::string& scene_id, Json doc, int base_version);

  /// Read-modify-write under the store lock. With base_version >= 0 the
  /// stored version must match. An edit that changes nothing keeps the
  /// version. Returns the resulting version.
  int update(const std::string& scene_id, const std::function<void(Json&)>& edit,
             int base_version = -1);

  /// Scene ids are restricted to [A-Za-z0-9_.-] and may not start with '.'.
  static void check_scene_id(const std::string& scene_id);

 private:
  [[nodiscard]] std::filesystem::path path_of(const std::string& scene_id) const;
  [[nodiscard]] Json read_unlocked(const std::string& scene_id) const;
  int store_unlocked(const std::string& scene_id, Json& doc, int new_version);

  std::filesystem::path root_;
  mutable std::mutex mutex_;
};

/// Fresh document for a scene.
Json new_scene_document(const std::string& scene_id, Sport sport, ImageSize image_size);

/// Checks schema_version and that every stored camera passes the camera
/// invariants for the scene's sport. Throws FieldError.
void check_document(const Json& doc, const CourtRegistry& registry);

}  // namespace courtlab
