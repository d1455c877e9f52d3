#include "courtlab/kernels/kernels.hpp"

namespace courtlab::kernels::scalar {

void project(const ProjectionParams& p, ConstPoints in, std::span<double> u, std::span<double> v,
             std::span<double> depth) {
  const double* r = p.rotation;
  const std::size_t n = in.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double x = in.x[i];
    const double y = in.y[i];
    const double z = in.z[i];
    const double xc = r[0] * x + r[1] * y + r[2] * z + p.translation[0];
    const double yc = r[3] * x + r[4] * y + r[5] * z + p.translation[1];
    const double zc = r[6] * x + r[7] * y + r[8] * z + p.translation[2];
    const double inv = 1.0 / zc;
    u[i] = p.fx * (xc * inv) + p.cx;
    v[i] = p.fy * (yc * inv) + p.cy;
    depth[i] = zc;
  }
}

void scale_about(double s, const double c[3], Points pts) {
  const double kx = (1.0 - s) * c[0];
  const double ky = (1.0 - s) * c[1];
  const double kz = (1.0 - s) * c[2];
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    pts.x[i] = s * pts.x[i] + kx;
    pts.y[i] = s * pts.y[i] + ky;
    pts.z[i] = s * pts.z[i] + kz;
  }
}

void squared_distances(const double q[3], ConstPoints pts, std::span<double> out) {
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = pts.x[i] - q[0];
    const double dy = pts.y[i] - q[1];
    const double dz = pts.z[i] - q[2];
    out[i] = dx * dx + dy * dy + dz * dz;
  }
}

}  // namespace courtlab::kernels::scalar
