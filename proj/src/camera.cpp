#include "courtlab/camera.hpp"

#include "courtlab/kernels/kernels.hpp"

#include <Eigen/Geometry>
#include <cmath>

namespace courtlab {

double ImageSize::diagonal() const noexcept {
  return std::hypot(static_cast<double>(width), static_cast<double>(height));
}

Mat3 PinholeCamera::intrinsics() const {
  Mat3 k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

PinholeCamera PinholeCamera::look_at(const Vec3& eye, const Vec3& target, double fx, double fy,
                                     double cx, double cy, ImageSize size) {
  const Vec3 forward = (target - eye).normalized();
  Vec3 right = forward.cross(Vec3::UnitZ());
  if (right.norm() < 1e-12) right = Vec3::UnitX().cross(forward);
  right.normalize();
  const Vec3 down = forward.cross(right);
  PinholeCamera cam;
  cam.fx = fx;
  cam.fy = fy;
  cam.cx = cx;
  cam.cy = cy;
  cam.rotation.row(0) = right.transpose();
  cam.rotation.row(1) = down.transpose();
  cam.rotation.row(2) = forward.transpose();
  cam.translation = -cam.rotation * eye;
  cam.image_size = size;
  return cam;
}

Projection project(const PinholeCamera& camera, const Vec3& world) {
  const Vec3 pc = camera.to_camera(world);
  Projection p;
  p.depth = pc.z();
  p.behind = !(pc.z() > 0.0);
  const double inv = 1.0 / pc.z();
  p.pixel = Vec2(camera.fx * (pc.x() * inv) + camera.cx, camera.fy * (pc.y() * inv) + camera.cy);
  return p;
}

std::vector<Projection> reproject(const PinholeCamera& camera, std::span<const Vec3> world_points) {
  const std::size_t n = world_points.size();
  std::vector<double> buf(6 * n);
  std::span<double> xs(buf.data(), n), ys(buf.data() + n, n), zs(buf.data() + 2 * n, n);
  std::span<double> us(buf.data() + 3 * n, n), vs(buf.data() + 4 * n, n), ds(buf.data() + 5 * n, n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = world_points[i].x();
    ys[i] = world_points[i].y();
    zs[i] = world_points[i].z();
  }
  kernels::ProjectionParams params{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) params.rotation[3 * r + c] = camera.rotation(r, c);
    params.translation[r] = camera.translation[r];
  }
  params.fx = camera.fx;
  params.fy = camera.fy;
  params.cx = camera.cx;
  params.cy = camera.cy;
  kernels::project(params, kernels::ConstPoints{xs, ys, zs}, us, vs, ds);

  std::vector<Projection> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].pixel = Vec2(us[i], vs[i]);
    out[i].depth = ds[i];
    out[i].behind = !(ds[i] > 0.0);
  }
  return out;
}

void check_camera(const PinholeCamera& camera, const CourtSpec& spec) {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::invalid_geometry, "camera invariant violated: " + what);
  };
  const Mat3& r = camera.rotation;
  if ((r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9) fail("rotation not orthonormal");
  if (std::abs(r.determinant() - 1.0) > 1e-9) fail("rotation determinant != +1");
  if (!(camera.fx > 0.0) || !(camera.fy > 0.0)) fail("focal lengths must be positive");
  if (!(camera.center().z() > spec.surface_height_m)) fail("camera center below the playing surface");
  for (const auto& [name, point] : spec.keypoints) {
    if (!(camera.to_camera(point).z() > 0.0)) fail("keypoint " + name + " behind the camera");
  }
}

}  // namespace courtlab
