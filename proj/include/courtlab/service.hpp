#pragma once

#include "courtlab/annotation_store.hpp"

#include <atomic>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace httplib {
class Server;
}

namespace courtlab {

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// Status code for an error category: not_found 404, conflict 409,
/// calibration_failed 422, everything else 400.
int http_status(ErrorCode code) noexcept;

/// {"error": code, "message": text, "field": path-or-null}.
HttpResponse error_response(const Error& e);

using ClickList = std::vector<std::pair<std::string, Vec2>>;

/// Clicks as an object {"far_left": [u, v], ...}. Throws FieldError.
ClickList read_clicks(const Json& j, const std::string& path = "clicks");
Json clicks_to_json(const ClickList& clicks);

/// Solved camera, fit report, closed court-box polyline (ground corners in
/// click order) and every court line projected at surface height.
Json calibration_payload(const CourtSpec& spec, const CalibrationResult& result);

/// Runs the calibration on a frame's stored clicks (or `clicks` if given),
/// writes clicks, camera and fit into the scene document and returns the
/// calibration payload plus the new document version.
Json calibrate_frame(AnnotationStore& store, const CourtRegistry& registry,
                     const std::string& scene_id, const std::string& frame_id,
                     const std::optional<ClickList>& clicks, const PnpOptions& options,
                     int base_version = -1);

/// Lifts the ball from its pixel and ground click using the frame's stored
/// camera, writes the clicks and the 3D point into the document and returns
/// the point, residual, consistency flag and overlay pixels.
Json lift_ball_frame(AnnotationStore& store, const CourtRegistry& registry,
                     const std::string& scene_id, const std::string& frame_id, const Vec2& pixel,
                     const Vec2& ground_click, int base_version = -1);

/// Request router behind the HTTP server. handle() never throws; every
/// failure becomes an error response.
///
///   GET  /api/scenes
///   GET  /api/scenes/{scene}/frames
///   GET  /api/scenes/{scene}/frames/{frame}/image
///   GET  /api/scenes/{scene}/document
///   PUT  /api/scenes/{scene}/document              {base_version, document}
///   POST /api/scenes/{scene}/frames/{frame}/court  {clicks, simplified?, base_version?}
///   POST /api/scenes/{scene}/frames/{frame}/ball_line      {pixel}
///   POST /api/scenes/{scene}/frames/{frame}/ball           {pixel, ground_click, base_version?}
///   POST /api/scenes/{scene}/frames/{frame}/player_height  {player_id, annotated_height,
///                                                           vertices, joints, base_version?}
///   POST /api/scenes/{scene}/trajectory            {frame_rate, samples, camera_frame,
///                                                   detections?, base_version?}
class Service {
 public:
  Service(AnnotationStore& store, std::filesystem::path image_root, CourtRegistry registry = {});

  HttpResponse handle(const std::string& method, const std::string& path, const std::string& body);

  /// Blocks serving HTTP until stop() is called. Port 0 picks a free port;
  /// `on_listening` receives the bound port once the socket is open.
  void serve(const std::string& host, int port, const std::function<void(int)>& on_listening = {});
  void stop();

 private:
  HttpResponse route(const std::string& method, const std::vector<std::string>& parts,
                     const std::string& body);
  Json list_frames(const std::string& scene_id) const;
  HttpResponse frame_image(const std::string& scene_id, const std::string& frame_id) const;
  Json put_document(const std::string& scene_id, const Json& req);
  Json ball_line(const std::string& scene_id, const std::string& frame_id, const Json& req) const;
  Json ball(const std::string& scene_id, const std::string& frame_id, const Json& req);
  Json player_height(const std::string& scene_id, const std::string& frame_id, const Json& req);
  Json trajectory(const std::string& scene_id, const Json& req);

  AnnotationStore& store_;
  std::filesystem::path image_root_;
  CourtRegistry registry_;
  std::atomic<httplib::Server*> server_{nullptr};
};

}  // namespace courtlab
