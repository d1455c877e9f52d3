#include "courtlab/calibration.hpp"

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <limits>

namespace courtlab {

std::vector<Correspondence> make_correspondences(
    const CourtSpec& spec, std::span<const std::pair<std::string, Vec2>> clicks) {
  std::vector<Correspondence> out;
  out.reserve(clicks.size());
  for (const auto& [name, pixel] : clicks) {
    auto it = spec.keypoints.find(name);
    if (it == spec.keypoints.end()) {
      throw Error(ErrorCode::not_found, "unknown court keypoint '" + name + "'");
    }
    out.push_back({name, pixel, it->second});
  }
  return out;
}

namespace {

using MatX = Eigen::MatrixXd;
using VecX = Eigen::VectorXd;

Mat3 normalizing_transform(std::span<const Vec2> pts) {
  Vec2 mean = Vec2::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  double spread = 0.0;
  for (const auto& p : pts) spread += (p - mean).norm();
  spread /= static_cast<double>(pts.size());
  const double s = spread > 0.0 ? std::sqrt(2.0) / spread : 1.0;
  Mat3 t;
  t << s, 0.0, -s * mean.x(), 0.0, s, -s * mean.y(), 0.0, 0.0, 1.0;
  return t;
}

Mat3 orthonormalize(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Mat3 u = svd.matrixU();
    u.col(2) *= -1.0;
    r = u * svd.matrixV().transpose();
  }
  return r;
}

/// Focal length implied by a plane homography under square pixels and a
/// known principal point (orthogonal, equal-norm rotation columns).
std::optional<double> focal_from_homography(const Mat3& h, const Vec2& pp) {
  Mat3 shift;
  shift << 1.0, 0.0, -pp.x(), 0.0, 1.0, -pp.y(), 0.0, 0.0, 1.0;
  const Mat3 hc = shift * h;
  const Vec3 c1 = hc.col(0);
  const Vec3 c2 = hc.col(1);
  // a * w + b = 0 with w = 1 / f^2.
  const double a1 = c1.x() * c2.x() + c1.y() * c2.y();
  const double b1 = c1.z() * c2.z();
  const double a2 = c1.x() * c1.x() + c1.y() * c1.y() - c2.x() * c2.x() - c2.y() * c2.y();
  const double b2 = c1.z() * c1.z() - c2.z() * c2.z();
  const double den = a1 * a1 + a2 * a2;
  if (den <= 0.0) return std::nullopt;
  const double w = -(a1 * b1 + a2 * b2) / den;
  if (!(w > 0.0) || !std::isfinite(w)) return std::nullopt;
  return 1.0 / std::sqrt(w);
}

struct Pose {
  Mat3 rotation;
  Vec3 translation;
};

std::optional<Pose> decompose_homography(const Mat3& h, double focal, const Vec2& pp, double plane_z) {
  Mat3 k;
  k << focal, 0.0, pp.x(), 0.0, focal, pp.y(), 0.0, 0.0, 1.0;
  const Mat3 m = k.inverse() * h;
  const double n1 = m.col(0).norm();
  const double n2 = m.col(1).norm();
  if (!(n1 > 0.0) || !(n2 > 0.0)) return std::nullopt;
  double lambda = 2.0 / (n1 + n2);
  if (m(2, 2) * lambda < 0.0) lambda = -lambda;  // plane origin in front of the camera
  const Vec3 r1 = lambda * m.col(0);
  const Vec3 r2 = lambda * m.col(1);
  const Vec3 t_plane = lambda * m.col(2);
  Mat3 r;
  r.col(0) = r1;
  r.col(1) = r2;
  r.col(2) = r1.cross(r2);
  const Mat3 rot = orthonormalize(r);
  return Pose{rot, t_plane - plane_z * rot.col(2)};
}

enum class IntrinsicsLayout { shared_focal, two_focals, two_focals_and_center };

struct State {
  double fx, fy, cx, cy;
  Mat3 rotation;
  Vec3 translation;
};

class Refiner {
 public:
  Refiner(std::span<const Correspondence> corr, std::span<const double> weights,
          IntrinsicsLayout layout, const PnpOptions& options)
      : corr_(corr), sqrt_w_(weights.size()), layout_(layout), options_(options) {
    for (std::size_t i = 0; i < weights.size(); ++i) sqrt_w_[i] = std::sqrt(weights[i]);
    n_intr_ = layout == IntrinsicsLayout::shared_focal ? 1
              : layout == IntrinsicsLayout::two_focals ? 2
                                                       : 4;
  }

  [[nodiscard]] int num_params() const { return n_intr_ + 6; }

  /// Weighted residuals; returns false if any point falls behind the camera.
  bool residuals(const State& s, VecX& r) const {
    r.resize(2 * static_cast<Eigen::Index>(corr_.size()));
    for (std::size_t i = 0; i < corr_.size(); ++i) {
      const Vec3 pc = s.rotation * corr_[i].world_point + s.translation;
      if (!(pc.z() > 0.0)) return false;
      const double u = s.fx * (pc.x() / pc.z()) + s.cx;
      const double v = s.fy * (pc.y() / pc.z()) + s.cy;
      r(2 * i) = sqrt_w_[i] * (u - corr_[i].image_point.x());
      r(2 * i + 1) = sqrt_w_[i] * (v - corr_[i].image_point.y());
    }
    return true;
  }

  void jacobian(const State& s, MatX& j) const {
    j.setZero(2 * static_cast<Eigen::Index>(corr_.size()), num_params());
    for (std::size_t i = 0; i < corr_.size(); ++i) {
      const Vec3 a = s.rotation * corr_[i].world_point;
      const Vec3 pc = a + s.translation;
      const double iz = 1.0 / pc.z();
      const double xn = pc.x() * iz;
      const double yn = pc.y() * iz;
      const double w = sqrt_w_[i];
      const auto ru = static_cast<Eigen::Index>(2 * i);
      const auto rv = ru + 1;
      switch (layout_) {
        case IntrinsicsLayout::shared_focal:
          j(ru, 0) = w * xn;
          j(rv, 0) = w * yn;
          break;
        case IntrinsicsLayout::two_focals:
          j(ru, 0) = w * xn;
          j(rv, 1) = w * yn;
          break;
        case IntrinsicsLayout::two_focals_and_center:
          j(ru, 0) = w * xn;
          j(rv, 1) = w * yn;
          j(ru, 2) = w;
          j(rv, 3) = w;
          break;
      }
      // d(u, v) / d(camera point)
      Eigen::Matrix<double, 2, 3> dp;
      dp << s.fx * iz, 0.0, -s.fx * xn * iz, 0.0, s.fy * iz, -s.fy * yn * iz;
      // Left-multiplied rotation update: d(pc)/d(omega) = -[a]x.
      Mat3 skew;
      skew << 0.0, -a.z(), a.y(), a.z(), 0.0, -a.x(), -a.y(), a.x(), 0.0;
      const Eigen::Matrix<double, 2, 3> d_rot = -dp * skew;
      j.block<2, 3>(ru, n_intr_) = w * d_rot;
      j.block<2, 3>(ru, n_intr_ + 3) = w * dp;
    }
  }

  [[nodiscard]] State apply(const State& s, const VecX& delta) const {
    State out = s;
    switch (layout_) {
      case IntrinsicsLayout::shared_focal:
        out.fx += delta(0);
        out.fy = out.fx;
        break;
      case IntrinsicsLayout::two_focals:
        out.fx += delta(0);
        out.fy += delta(1);
        break;
      case IntrinsicsLayout::two_focals_and_center:
        out.fx += delta(0);
        out.fy += delta(1);
        out.cx += delta(2);
        out.cy += delta(3);
        break;
    }
    const Vec3 omega = delta.segment<3>(n_intr_);
    const double angle = omega.norm();
    Mat3 update = Mat3::Identity();
    if (angle > 0.0) update = Eigen::AngleAxisd(angle, omega / angle).toRotationMatrix();
    out.rotation = orthonormalize(update * s.rotation);
    out.translation += delta.segment<3>(n_intr_ + 3);
    return out;
  }

  State run(State s, FitReport& report) const {
    VecX r;
    if (!residuals(s, r)) {
      report.cost_history.push_back(std::numeric_limits<double>::infinity());
      return s;
    }
    double cost = r.squaredNorm();
    report.cost_history.push_back(cost);
    MatX j;
    double mu = -1.0;
    report.converged = false;
    for (int iter = 0; iter < options_.max_iterations; ++iter) {
      jacobian(s, j);
      const MatX a = j.transpose() * j;
      const VecX g = j.transpose() * r;
      if (mu < 0.0) mu = 1e-3 * a.diagonal().maxCoeff();
      VecX diag = a.diagonal().cwiseMax(1e-12);
      bool accepted = false;
      for (int attempt = 0; attempt < 40; ++attempt) {
        MatX damped = a;
        damped.diagonal() += mu * diag;
        const VecX delta = damped.ldlt().solve(-g);
        if (!delta.allFinite()) {
          mu *= 4.0;
          continue;
        }
        const State candidate = apply(s, delta);
        VecX r_new;
        const bool ok = candidate.fx > 0.0 && candidate.fy > 0.0 && residuals(candidate, r_new);
        const double cost_new = ok ? r_new.squaredNorm() : std::numeric_limits<double>::infinity();
        if (cost_new < cost) {
          const double rel = (cost - cost_new) / std::max(cost, std::numeric_limits<double>::min());
          s = candidate;
          r = std::move(r_new);
          cost = cost_new;
          report.cost_history.push_back(cost);
          report.iterations = iter + 1;
          mu = std::max(mu / 3.0, 1e-12);
          accepted = true;
          if (delta.norm() < options_.step_tolerance || rel < options_.cost_tolerance) {
            report.converged = true;
          }
          break;
        }
        mu *= 4.0;
        if (delta.norm() < options_.step_tolerance) break;
      }
      if (!accepted) {
        // No descent direction left at any damping: a stationary point.
        report.converged = true;
        break;
      }
      if (report.converged || cost == 0.0) {
        report.converged = true;
        break;
      }
    }
    return s;
  }

 private:
  std::span<const Correspondence> corr_;
  std::vector<double> sqrt_w_;
  IntrinsicsLayout layout_;
  const PnpOptions& options_;
  int n_intr_ = 0;
};

}  // namespace

Mat3 estimate_homography(std::span<const Vec2> plane_points, std::span<const Vec2> image_points) {
  const std::size_t n = plane_points.size();
  if (n < 4 || image_points.size() != n) {
    throw Error(ErrorCode::insufficient_correspondences, "homography needs >= 4 point pairs");
  }
  const Mat3 tw = normalizing_transform(plane_points);
  const Mat3 ti = normalizing_transform(image_points);
  MatX a(2 * n, 9);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 w = tw * plane_points[i].homogeneous();
    const Vec3 p = ti * image_points[i].homogeneous();
    const double x = w.x(), y = w.y();
    const double u = p.x(), v = p.y();
    const auto r = static_cast<Eigen::Index>(2 * i);
    a.row(r) << -x, -y, -1.0, 0.0, 0.0, 0.0, u * x, u * y, u;
    a.row(r + 1) << 0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v;
  }
  Eigen::JacobiSVD<MatX> svd(a, Eigen::ComputeFullV);
  const VecX& sv = svd.singularValues();
  // A rank below 8 means the plane points cannot pin the homography.
  if (sv.size() >= 8 && sv(7) <= 1e-9 * sv(0)) {
    throw Error(ErrorCode::degenerate_geometry, "ground points are degenerate (collinear)");
  }
  const VecX h = svd.matrixV().col(8);
  Mat3 hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  return ti.inverse() * hn * tw;
}

CalibrationResult solve_pnp(std::span<const Correspondence> corr, ImageSize image_size,
                            const PnpOptions& options) {
  if (corr.empty()) {
    throw Error(ErrorCode::insufficient_correspondences, "no correspondences");
  }
  double plane_z = std::numeric_limits<double>::infinity();
  for (const auto& c : corr) plane_z = std::min(plane_z, c.world_point.z());

  std::vector<Vec2> plane_pts;
  std::vector<Vec2> plane_pix;
  std::vector<double> weights;
  std::size_t off_plane = 0;
  for (const auto& c : corr) {
    if (std::abs(c.world_point.z() - plane_z) <= 1e-9) {
      plane_pts.push_back(c.world_point.head<2>());
      plane_pix.push_back(c.image_point);
      weights.push_back(1.0);
    } else {
      ++off_plane;
      weights.push_back(options.net_weight);
    }
  }
  if (plane_pts.size() < 4) {
    throw Error(ErrorCode::insufficient_correspondences,
                "need >= 4 coplanar ground correspondences, got " + std::to_string(plane_pts.size()));
  }
  if (!options.simplified && off_plane == 0) {
    throw Error(ErrorCode::insufficient_correspondences,
                "full-intrinsics calibration needs an off-plane (net) correspondence");
  }

  // Collinearity of the ground points.
  {
    Vec2 mean = Vec2::Zero();
    for (const auto& p : plane_pts) mean += p;
    mean /= static_cast<double>(plane_pts.size());
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (const auto& p : plane_pts) cov += (p - mean) * (p - mean).transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
    if (!(es.eigenvalues()(0) > 1e-10 * es.eigenvalues()(1))) {
      throw Error(ErrorCode::degenerate_geometry, "ground correspondences are collinear");
    }
  }

  const Mat3 h = estimate_homography(plane_pts, plane_pix);
  const Vec2 pp = image_size.center();

  std::vector<double> focal_guesses{image_size.diagonal()};
  if (auto f = focal_from_homography(h, pp)) focal_guesses.push_back(*f);

  const IntrinsicsLayout layout =
      options.simplified ? IntrinsicsLayout::shared_focal
      : options.fix_principal_point ? IntrinsicsLayout::two_focals
                                    : IntrinsicsLayout::two_focals_and_center;
  const Refiner refiner(corr, weights, layout, options);

  std::optional<CalibrationResult> best;
  double best_cost = std::numeric_limits<double>::infinity();
  for (double f0 : focal_guesses) {
    auto pose = decompose_homography(h, f0, pp, plane_z);
    if (!pose) continue;
    State s{f0, f0, pp.x(), pp.y(), pose->rotation, pose->translation};
    FitReport report;
    report.initial_focal_px = f0;
    s = refiner.run(s, report);
    const double cost = report.cost_history.back();
    if (cost < best_cost) {
      best_cost = cost;
      CalibrationResult res;
      res.camera.fx = s.fx;
      res.camera.fy = s.fy;
      res.camera.cx = s.cx;
      res.camera.cy = s.cy;
      res.camera.rotation = s.rotation;
      res.camera.translation = s.translation;
      res.camera.image_size = image_size;
      res.report = std::move(report);
      best = std::move(res);
    }
  }
  if (!best) {
    throw Error(ErrorCode::degenerate_geometry, "homography decomposition failed");
  }

  CalibrationResult& out = *best;
  if (options.simplified) {
    out.camera.fy = out.camera.fx;
    out.camera.cx = pp.x();
    out.camera.cy = pp.y();
  }
  double sum_sq = 0.0;
  out.report.residuals_px.clear();
  for (const auto& c : corr) {
    const Projection p = project(out.camera, c.world_point);
    const double e = p.behind ? std::numeric_limits<double>::infinity() : (p.pixel - c.image_point).norm();
    out.report.residuals_px.push_back(e);
    sum_sq += e * e;
  }
  out.report.rmse_px = std::sqrt(sum_sq / static_cast<double>(corr.size()));

  const bool above_plane = out.camera.center().z() > plane_z;
  if (!(out.report.rmse_px <= options.rmse_ceiling_px) || !above_plane) {
    const std::string why = !above_plane ? "solved camera is below the court plane"
                                         : "reprojection RMSE " + std::to_string(out.report.rmse_px) +
                                               " px exceeds ceiling";
    throw CalibrationError("calibration failed: " + why, out);
  }
  return out;
}

FocalError focal_error(const PinholeCamera& predicted, const PinholeCamera& ground_truth) {
  if (!(ground_truth.fx > 0.0) || !(ground_truth.fy > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "ground-truth focal lengths must be positive");
  }
  return {100.0 * std::abs(predicted.fx - ground_truth.fx) / ground_truth.fx,
          100.0 * std::abs(predicted.fy - ground_truth.fy) / ground_truth.fy};
}

std::optional<double> DepthMap::sample(const Vec2& pixel) const {
  if (!std::isfinite(pixel.x()) || !std::isfinite(pixel.y())) return std::nullopt;
  const double fu = std::floor(pixel.x());
  const double fv = std::floor(pixel.y());
  const double du = pixel.x() - fu;
  const double dv = pixel.y() - fv;
  const auto u0 = static_cast<long long>(fu);
  const auto v0 = static_cast<long long>(fv);
  double acc = 0.0;
  const double wts[4] = {(1.0 - du) * (1.0 - dv), du * (1.0 - dv), (1.0 - du) * dv, du * dv};
  const long long us[4] = {u0, u0 + 1, u0, u0 + 1};
  const long long vs[4] = {v0, v0, v0 + 1, v0 + 1};
  for (int k = 0; k < 4; ++k) {
    if (wts[k] == 0.0) continue;
    if (us[k] < 0 || vs[k] < 0 || us[k] >= width || vs[k] >= height) return std::nullopt;
    const double d = data[static_cast<std::size_t>(vs[k] * width + us[k])];
    if (!(d > 0.0) || !std::isfinite(d)) return std::nullopt;
    acc += wts[k] * d;
  }
  return acc;
}

std::vector<PropagatedKeypoint> propagate_keypoints(std::span<const Vec2> ref_keypoints,
                                                    const DepthMap& ref_depth,
                                                    const PinholeCamera& ref_camera,
                                                    const AdjacentView& adjacent) {
  std::vector<PropagatedKeypoint> out;
  out.reserve(ref_keypoints.size());
  for (const Vec2& kp : ref_keypoints) {
    PropagatedKeypoint res;
    const auto depth = ref_depth.sample(kp);
    if (!depth) {
      res.failure = "missing or non-positive depth";
      out.push_back(std::move(res));
      continue;
    }
    const Vec3 ref_point(*depth * (kp.x() - ref_camera.cx) / ref_camera.fx,
                         *depth * (kp.y() - ref_camera.cy) / ref_camera.fy, *depth);
    const Vec3 adj_point = adjacent.rotation * ref_point + adjacent.translation;
    if (!(adj_point.z() > 0.0)) {
      res.failure = "behind the adjacent camera";
      out.push_back(std::move(res));
      continue;
    }
    res.pixel = Vec2(adjacent.fx * adj_point.x() / adj_point.z() + adjacent.cx,
                     adjacent.fy * adj_point.y() / adj_point.z() + adjacent.cy);
    out.push_back(std::move(res));
  }
  return out;
}

}  // namespace courtlab
