#include "courtlab/annotation_store.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <thread>

namespace courtlab {

namespace fs = std::filesystem;

AnnotationStore::AnnotationStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create store root " + root_.string());
}

void AnnotationStore::check_scene_id(const std::string& scene_id) {
  const bool ok = !scene_id.empty() && scene_id.front() != '.' && scene_id.size() <= 128 &&
                  std::all_of(scene_id.begin(), scene_id.end(), [](unsigned char c) {
                    return std::isalnum(c) || c == '_' || c == '-' || c == '.';
                  });
  if (!ok) throw FieldError("scene_id", "invalid scene id '" + scene_id + "'");
}

fs::path AnnotationStore::path_of(const std::string& scene_id) const {
  check_scene_id(scene_id);
  return root_ / (scene_id + ".json");
}

std::vector<std::string> AnnotationStore::list_scenes() const {
  std::vector<std::string> out;
  std::lock_guard lock(mutex_);
  for (const auto& e : fs::directory_iterator(root_)) {
    if (!e.is_regular_file() || e.path().extension() != ".json") continue;
    out.push_back(e.path().stem().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool AnnotationStore::exists(const std::string& scene_id) const {
  return fs::exists(path_of(scene_id));
}

Json AnnotationStore::read_unlocked(const std::string& scene_id) const {
  const auto p = path_of(scene_id);
  if (!fs::exists(p)) throw Error(ErrorCode::not_found, "unknown scene " + scene_id);
  return read_json_file(p);
}

Json AnnotationStore::read(const std::string& scene_id) const {
  std::lock_guard lock(mutex_);
  return read_unlocked(scene_id);
}

std::string AnnotationStore::read_text(const std::string& scene_id) const {
  std::lock_guard lock(mutex_);
  const auto p = path_of(scene_id);
  if (!fs::exists(p)) throw Error(ErrorCode::not_found, "unknown scene " + scene_id);
  return read_text_file(p);
}

int AnnotationStore::store_unlocked(const std::string& scene_id, Json& doc, int new_version) {
  doc["version"] = new_version;
  if (!doc.contains("schema_version")) doc["schema_version"] = kDocumentSchemaVersion;
  const auto target = path_of(scene_id);
  static std::atomic<unsigned> counter{0};
  const auto tmp = root_ / ("." + scene_id + ".tmp" + std::to_string(counter++));
  write_text_file(tmp, dump_document(doc));
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::io_error, "cannot replace " + target.string());
  }
  return new_version;
}

int AnnotationStore::write(const std::string& scene_id, Json doc, int base_version) {
  std::lock_guard lock(mutex_);
  const auto p = path_of(scene_id);
  int current = 0;
  if (fs::exists(p)) current = read_unlocked(scene_id).value("version", 0);
  if (current != base_version)
    throw Error(ErrorCode::conflict, "document " + scene_id + " is at version " +
                                         std::to_string(current) + ", write was based on " +
                                         std::to_string(base_version));
  if (current > 0) {
    // An unchanged document keeps its version.
    Json stored = read_unlocked(scene_id);
    doc["version"] = current;
    if (!doc.contains("schema_version")) doc["schema_version"] = kDocumentSchemaVersion;
    if (stored == doc) return current;
  }
  return store_unlocked(scene_id, doc, current + 1);
}

int AnnotationStore::update(const std::string& scene_id, const std::function<void(Json&)>& edit,
                            int base_version) {
  std::lock_guard lock(mutex_);
  Json doc = read_unlocked(scene_id);
  const int current = doc.value("version", 0);
  if (base_version >= 0 && base_version != current)
    throw Error(ErrorCode::conflict, "document " + scene_id + " is at version " +
                                         std::to_string(current) + ", update was based on " +
                                         std::to_string(base_version));
  const Json before = doc;
  edit(doc);
  if (doc == before) return current;
  return store_unlocked(scene_id, doc, current + 1);
}

Json new_scene_document(const std::string& scene_id, Sport sport, ImageSize image_size) {
  return Json{{"schema_version", kDocumentSchemaVersion},
              {"version", 0},
              {"scene", Json{{"scene_id", scene_id},
                             {"sport", std::string(to_string(sport))},
                             {"image_width", image_size.width},
                             {"image_height", image_size.height}}},
              {"frames", Json::object()},
              {"trajectories", Json::array()}};
}

void check_document(const Json& doc, const CourtRegistry& registry) {
  if (!doc.is_object()) throw FieldError("document", "expected an object");
  if (doc.value("schema_version", -1) != kDocumentSchemaVersion)
    throw FieldError("document.schema_version", "expected " + std::to_string(kDocumentSchemaVersion));
  const auto& scene = field(doc, "scene", "document");
  const Sport sport = parse_sport(read_string(field(scene, "sport", "document.scene"), "document.scene.sport"));
  const auto& spec = registry.get(sport);
  if (!doc.contains("frames")) return;
  const auto& frames = doc["frames"];
  if (!frames.is_object()) throw FieldError("document.frames", "expected an object");
  for (const auto& [fid, frame] : frames.items()) {
    if (!frame.contains("camera") || frame["camera"].is_null()) continue;
    const std::string path = "document.frames." + fid + ".camera";
    const auto cam = camera_from_json(frame["camera"], path);
    try {
      check_camera(cam, spec);
    } catch (const Error& e) {
      throw FieldError(path, e.what());
    }
  }
}

}  // namespace courtlab
