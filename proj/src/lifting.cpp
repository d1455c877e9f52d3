#include "courtlab/lifting.hpp"

#include "courtlab/kernels/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace courtlab {

Ray pixel_ray(const PinholeCamera& camera, const Vec2& pixel) {
  const Vec3 k_inv_p((pixel.x() - camera.cx) / camera.fx, (pixel.y() - camera.cy) / camera.fy, 1.0);
  Ray ray;
  ray.origin = camera.center();
  ray.direction = (camera.rotation.transpose() * k_inv_p).normalized();
  ray.source_pixel = pixel;
  return ray;
}

PlaneHit intersect_plane(const Ray& ray, double z) {
  const double dz = ray.direction.z();
  if (std::abs(dz) < 1e-12) {
    throw Error(ErrorCode::no_intersection, "ray is parallel to the plane");
  }
  const double lambda = (z - ray.origin.z()) / dz;
  if (!(lambda > 0.0)) {
    throw Error(ErrorCode::behind_camera, "plane intersection lies behind the camera");
  }
  PlaneHit hit;
  hit.lambda = lambda;
  hit.point = ray.at(lambda);
  hit.point.z() = z;
  return hit;
}

double point_segment_distance(const Vec2& p, const ImageSegment& s) noexcept {
  const Vec2 d = s.b - s.a;
  const double len2 = d.squaredNorm();
  if (len2 == 0.0) return (p - s.a).norm();
  const double t = std::clamp((p - s.a).dot(d) / len2, 0.0, 1.0);
  return (p - (s.a + t * d)).norm();
}

namespace {

Vec3 ground_of(const Ray& ray, double lambda, double surface_z) {
  Vec3 g = ray.at(lambda);
  g.z() = surface_z;
  return g;
}

bool horizontal_component_vanishes(const Vec3& d) {
  return std::hypot(d.x(), d.y()) < 1e-12;
}

// Liang-Barsky clip of a 2D segment to [0, w] x [0, h].
bool clip_to_rect(Vec2& a, Vec2& b, double w, double h) {
  double t0 = 0.0;
  double t1 = 1.0;
  const Vec2 d = b - a;
  const double p[4] = {-d.x(), d.x(), -d.y(), d.y()};
  const double q[4] = {a.x(), w - a.x(), a.y(), h - a.y()};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
      continue;
    }
    const double r = q[i] / p[i];
    if (p[i] < 0.0) {
      t0 = std::max(t0, r);
    } else {
      t1 = std::min(t1, r);
    }
    if (t0 > t1) return false;
  }
  const Vec2 a0 = a;
  a = a0 + t0 * d;
  b = a0 + t1 * d;
  return true;
}

}  // namespace

ImageSegment projection_line(const PinholeCamera& camera, const Vec2& ball_pixel,
                             double lambda_min, double lambda_max, double surface_z) {
  const Ray ray = pixel_ray(camera, ball_pixel);
  ImageSegment seg;
  if (horizontal_component_vanishes(ray.direction)) {
    const Projection p = project(camera, ground_of(ray, lambda_min, surface_z));
    if (p.behind) throw Error(ErrorCode::behind_camera, "ground point is behind the camera");
    seg.a = seg.b = p.pixel;
    seg.degenerate = true;
    return seg;
  }
  const Projection pa = project(camera, ground_of(ray, lambda_min, surface_z));
  const Projection pb = project(camera, ground_of(ray, lambda_max, surface_z));
  if (pa.behind || pb.behind) {
    throw Error(ErrorCode::behind_camera, "projection-line endpoint is behind the camera");
  }
  seg.a = pa.pixel;
  seg.b = pb.pixel;
  return seg;
}

AssistiveLine assistive_line(const PinholeCamera& camera, const Vec2& ball_pixel, double surface_z) {
  const Ray ray = pixel_ray(camera, ball_pixel);
  const double dz = ray.direction.z();
  if (!(dz < -1e-12)) {
    throw Error(ErrorCode::no_intersection, "ball ray never reaches the playing surface");
  }
  AssistiveLine out;
  out.lambda_max = (surface_z - ray.origin.z()) / dz;
  out.lambda_min = std::min(0.1 / -dz, out.lambda_max);

  // Keep the near end of the ground locus in front of the camera; camera
  // depth is affine along the locus.
  auto depth_at = [&](double lambda) { return camera.to_camera(ground_of(ray, lambda, surface_z)).z(); };
  const double d_min = depth_at(out.lambda_min);
  const double d_max = depth_at(out.lambda_max);
  constexpr double kMinDepth = 1e-3;
  if (d_min < kMinDepth && d_max > d_min) {
    const double t = (kMinDepth - d_min) / (d_max - d_min);
    out.lambda_min = out.lambda_min + t * (out.lambda_max - out.lambda_min);
  }

  ImageSegment seg = projection_line(camera, ball_pixel, out.lambda_min, out.lambda_max, surface_z);
  if (!seg.degenerate) {
    out.visible = clip_to_rect(seg.a, seg.b, camera.image_size.width, camera.image_size.height);
  }
  out.segment = seg;
  return out;
}

LiftResult lift_ball(const PinholeCamera& camera, const Vec2& ball_pixel, const Vec2& ground_click,
                     double surface_z, double tolerance_m) {
  const PlaneHit ground = intersect_plane(pixel_ray(camera, ground_click), surface_z);
  const Ray ray = pixel_ray(camera, ball_pixel);
  const Vec2 dxy = ray.direction.head<2>();
  const double dd = dxy.squaredNorm();
  if (dd < 1e-24) {
    throw Error(ErrorCode::degenerate_geometry, "vertical ball ray: depth is unconstrained");
  }
  const Vec2 offset = ground.point.head<2>() - ray.origin.head<2>();
  const double lambda = dxy.dot(offset) / dd;
  if (!(lambda > 0.0)) {
    throw Error(ErrorCode::behind_camera, "solved ball depth is behind the camera");
  }
  LiftResult res;
  res.lambda = lambda;
  res.point = ray.at(lambda);
  res.ground_point = ground.point;
  res.residual_m = (res.point.head<2>() - ground.point.head<2>()).norm();
  res.inconsistent_click = res.residual_m > tolerance_m;
  return res;
}

Vec3 TrajectorySegment::at(double t) const {
  const double tau = t - t0;
  return p0 + v0 * tau + 0.5 * acceleration * tau * tau;
}

TrajectorySegment fit_trajectory(std::span<const TrajectorySample> samples, double frame_rate) {
  if (samples.size() != 3) {
    throw Error(ErrorCode::invalid_argument, "trajectory fit needs exactly three samples");
  }
  if (!(frame_rate > 0.0)) throw Error(ErrorCode::invalid_argument, "frame rate must be positive");
  const double t0 = samples[0].t;
  const double t1 = samples[1].t;
  const double t2 = samples[2].t;
  if (!(t1 > t0) || !(t2 > t1)) {
    throw Error(ErrorCode::non_increasing_times, "trajectory sample times must strictly increase");
  }
  const double min_gap = 1.0 / (10.0 * frame_rate);
  if (t1 - t0 < min_gap || t2 - t1 < min_gap) {
    throw Error(ErrorCode::ill_conditioned, "trajectory samples are closer than a tenth of a frame");
  }
  const double tau1 = t1 - t0;
  const double tau2 = t2 - t0;
  // Per axis: d_k = v tau_k + a tau_k^2 / 2, k = 1, 2.
  const double det = 0.5 * tau1 * tau2 * (tau2 - tau1);
  const Vec3 d1 = samples[1].point - samples[0].point;
  const Vec3 d2 = samples[2].point - samples[0].point;
  TrajectorySegment seg;
  seg.t0 = t0;
  seg.t_end = t2;
  seg.p0 = samples[0].point;
  seg.v0 = (0.5 * tau2 * tau2 * d1 - 0.5 * tau1 * tau1 * d2) / det;
  seg.acceleration = (tau1 * d2 - tau2 * d1) / det;
  seg.frame_rate = frame_rate;
  return seg;
}

TrajectoryQuality trajectory_quality(const TrajectorySegment& segment,
                                     std::span<const Detection> detections,
                                     const PinholeCamera& camera, double threshold_px) {
  if (detections.empty()) throw Error(ErrorCode::empty_input, "no detections to score");
  constexpr double kSlack = 1e-9;
  std::vector<Vec3> points;
  points.reserve(detections.size());
  for (const auto& d : detections) {
    if (d.t < segment.t0 - kSlack || d.t > segment.t_end + kSlack) {
      throw Error(ErrorCode::invalid_argument, "detection outside the segment's valid interval");
    }
    points.push_back(segment.at(d.t));
  }
  const auto proj = reproject(camera, points);
  TrajectoryQuality q;
  double sum = 0.0;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const double e = proj[i].behind ? std::numeric_limits<double>::infinity()
                                    : (proj[i].pixel - detections[i].pixel).norm();
    q.errors_px.push_back(e);
    sum += e;
  }
  q.mean_error_px = sum / static_cast<double>(detections.size());
  q.pass = q.mean_error_px <= threshold_px;
  return q;
}

std::optional<Vec2> facing_from_joints(const std::map<std::string, Vec3>& joints) {
  auto l = joints.find("left_hip");
  auto r = joints.find("right_hip");
  if (l == joints.end() || r == joints.end()) return std::nullopt;
  // left x up points forward for a right-handed, z-up frame.
  const Vec3 forward = (l->second - r->second).cross(Vec3::UnitZ());
  const Vec2 planar = forward.head<2>();
  if (planar.norm() < 1e-12) return std::nullopt;
  return planar.normalized();
}

PlayerMesh mesh_from_camera_frame(const PinholeCamera& camera, std::string player_id,
                                  std::span<const Vec3> vertices_cam,
                                  const std::map<std::string, Vec3>& joints_cam) {
  const Mat3 rt = camera.rotation.transpose();
  PlayerMesh mesh;
  mesh.player_id = std::move(player_id);
  mesh.vertices.reserve(vertices_cam.size());
  for (const auto& v : vertices_cam) mesh.vertices.push_back(rt * (v - camera.translation));
  for (const auto& [name, j] : joints_cam) mesh.joints.emplace(name, rt * (j - camera.translation));
  if (auto f = facing_from_joints(mesh.joints)) mesh.facing = *f;
  return mesh;
}

RealignResult realign_mesh(const PinholeCamera& camera, const PlayerMesh& mesh,
                           double annotated_height, double surface_z) {
  if (mesh.vertices.empty()) throw Error(ErrorCode::empty_input, "mesh has no vertices");
  if (annotated_height < surface_z) {
    throw Error(ErrorCode::invalid_argument, "annotated height is below the playing surface");
  }
  const Vec3 c = camera.center();
  if (!(c.z() > annotated_height)) {
    throw Error(ErrorCode::invalid_geometry, "camera must be above the annotated height");
  }
  std::size_t lowest = 0;
  for (std::size_t i = 1; i < mesh.vertices.size(); ++i) {
    if (mesh.vertices[i].z() < mesh.vertices[lowest].z()) lowest = i;
  }
  const Vec3& v = mesh.vertices[lowest];
  const double denom = v.z() - c.z();
  if (std::abs(denom) < 1e-12) {
    throw Error(ErrorCode::degenerate_geometry, "ray to the lowest vertex is parallel to the target plane");
  }
  // Ratio of distances from C to the target and to the vertex along one ray.
  const double s = (annotated_height - c.z()) / denom;
  if (!(s > 0.0)) throw Error(ErrorCode::invalid_geometry, "non-positive depth scale");

  RealignResult out;
  out.scale = s;
  out.lowest_vertex = lowest;
  out.mesh = mesh;

  const std::size_t nv = mesh.vertices.size();
  const std::size_t nj = mesh.joints.size();
  const std::size_t n = nv + nj;
  std::vector<double> buf(3 * n);
  std::span<double> xs(buf.data(), n), ys(buf.data() + n, n), zs(buf.data() + 2 * n, n);
  std::size_t k = 0;
  for (const auto& p : mesh.vertices) {
    xs[k] = p.x(); ys[k] = p.y(); zs[k] = p.z(); ++k;
  }
  for (const auto& [name, p] : mesh.joints) {
    xs[k] = p.x(); ys[k] = p.y(); zs[k] = p.z(); ++k;
  }
  const double center[3] = {c.x(), c.y(), c.z()};
  kernels::scale_about(s, center, kernels::Points{xs, ys, zs});
  k = 0;
  for (auto& p : out.mesh.vertices) {
    p = Vec3(xs[k], ys[k], zs[k]); ++k;
  }
  for (auto& [name, p] : out.mesh.joints) {
    p = Vec3(xs[k], ys[k], zs[k]); ++k;
  }
  if (auto f = facing_from_joints(out.mesh.joints)) out.mesh.facing = *f;
  return out;
}

}  // namespace courtlab
