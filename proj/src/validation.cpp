#include "courtlab/validation.hpp"

#include "courtlab/calibration.hpp"
#include "courtlab/lifting.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <unordered_map>

namespace courtlab {

Triangulation triangulate(std::span<const ViewObservation> views) {
  if (views.size() < 2)
    throw Error(ErrorCode::insufficient_correspondences, "triangulation needs at least two views");

  std::vector<Ray> rays;
  rays.reserve(views.size());
  for (const auto& v : views) rays.push_back(pixel_ray(v.camera, v.pixel));

  double max_baseline = 0.0;
  for (std::size_t i = 0; i < rays.size(); ++i)
    for (std::size_t j = i + 1; j < rays.size(); ++j)
      max_baseline = std::max(max_baseline, (rays[i].origin - rays[j].origin).norm());
  if (max_baseline < 1e-9)
    throw Error(ErrorCode::degenerate_geometry, "all views share one camera center");

  // sum_i (I - d d^T) X = sum_i (I - d d^T) c
  Mat3 A = Mat3::Zero();
  Vec3 b = Vec3::Zero();
  for (const auto& r : rays) {
    const Mat3 P = Mat3::Identity() - r.direction * r.direction.transpose();
    A += P;
    b += P * r.origin;
  }
  Triangulation t;
  t.point = A.ldlt().solve(b);

  double ss = 0.0;
  for (const auto& r : rays) {
    const Vec3 w = t.point - r.origin;
    ss += (w - w.dot(r.direction) * r.direction).squaredNorm();
  }
  t.residual_m = std::sqrt(ss / static_cast<double>(rays.size()));

  for (std::size_t i = 0; i < rays.size(); ++i)
    for (std::size_t j = i + 1; j < rays.size(); ++j) {
      const double c = std::clamp(rays[i].direction.dot(rays[j].direction), -1.0, 1.0);
      t.max_ray_angle_deg = std::max(t.max_ray_angle_deg, std::acos(c) * 180.0 / std::numbers::pi);
    }
  t.ill_conditioned = t.max_ray_angle_deg < kMinTriangulationAngleDeg;
  return t;
}

double mpjpe(const JointSet& predicted, const JointSet& ground_truth, bool root_aligned,
             const std::string& root) {
  if (predicted.size() != ground_truth.size())
    throw Error(ErrorCode::mismatched_joints, "joint sets differ in size");
  if (predicted.empty()) throw Error(ErrorCode::empty_input, "no joints");
  Vec3 shift = Vec3::Zero();
  if (root_aligned) {
    auto p = predicted.find(root);
    auto g = ground_truth.find(root);
    if (p == predicted.end() || g == ground_truth.end())
      throw Error(ErrorCode::mismatched_joints, "root joint " + root + " missing");
    shift = g->second - p->second;
  }
  double sum = 0.0;
  for (const auto& [name, p] : predicted) {
    auto g = ground_truth.find(name);
    if (g == ground_truth.end()) throw Error(ErrorCode::mismatched_joints, "joint " + name + " has no match");
    sum += (p + shift - g->second).norm();
  }
  return sum / static_cast<double>(predicted.size());
}

Summary summarize(std::vector<double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  s.median = n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  return s;
}

namespace {

struct Samples {
  std::vector<double> fx, fy, bx, by, bz, pelvis, mpjpe;
  std::size_t records = 0;

  ErrorStats stats() const {
    ErrorStats s;
    s.focal_fx_pct = summarize(fx);
    s.focal_fy_pct = summarize(fy);
    s.ball_x_cm = summarize(bx);
    s.ball_y_cm = summarize(by);
    s.ball_z_cm = summarize(bz);
    s.pelvis_cm = summarize(pelvis);
    s.mpjpe_cm = summarize(mpjpe);
    s.records = records;
    return s;
  }
};

void accumulate(Samples& s, const EngineRecord& e, const EngineRecord& o) {
  ++s.records;
  if (e.camera && o.camera) {
    const auto fe = focal_error(*e.camera, *o.camera);
    s.fx.push_back(fe.fx_percent);
    s.fy.push_back(fe.fy_percent);
  }
  if (e.ball && o.ball) {
    const Vec3 d = (*e.ball - *o.ball).cwiseAbs() * 100.0;
    s.bx.push_back(d.x());
    s.by.push_back(d.y());
    s.bz.push_back(d.z());
  }
  for (const auto& [id, joints] : o.players) {
    auto it = e.players.find(id);
    if (it == e.players.end()) continue;
    auto pe = it->second.find("pelvis");
    auto po = joints.find("pelvis");
    if (pe != it->second.end() && po != joints.end())
      s.pelvis.push_back((pe->second - po->second).norm() * 100.0);
    // MPJPE over the joints both sides carry.
    JointSet a, b;
    for (const auto& [name, p] : joints) {
      auto q = it->second.find(name);
      if (q == it->second.end()) continue;
      a[name] = q->second;
      b[name] = p;
    }
    if (!a.empty()) s.mpjpe.push_back(mpjpe(a, b) * 100.0);
  }
}

}  // namespace

ErrorReport engine_error_report(std::span<const EngineRecord> engine,
                                std::span<const EngineRecord> oracle) {
  std::unordered_map<std::string, const EngineRecord*> by_frame;
  for (const auto& o : oracle) by_frame[o.frame_id] = &o;

  // Walk in frame-id order so the report does not depend on input order.
  std::vector<const EngineRecord*> matched;
  for (const auto& e : engine)
    if (by_frame.count(e.frame_id)) matched.push_back(&e);
  if (matched.empty()) throw Error(ErrorCode::empty_input, "no engine record matches the oracle");
  std::sort(matched.begin(), matched.end(),
            [](const EngineRecord* a, const EngineRecord* b) { return a->frame_id < b->frame_id; });

  Samples all;
  std::map<Sport, Samples> per;
  for (const auto* e : matched) {
    const auto& o = *by_frame.at(e->frame_id);
    accumulate(all, *e, o);
    accumulate(per[o.sport], *e, o);
  }
  ErrorReport r;
  r.overall = all.stats();
  for (const auto& [sport, s] : per) r.per_sport[sport] = s.stats();
  return r;
}

std::string format_error_report(const ErrorReport& report) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  auto block = [&](const std::string& title, const ErrorStats& s) {
    os << title << " (" << s.records << " records)\n";
    os << "  " << std::left << std::setw(12) << "quantity" << std::right << std::setw(8) << "n"
       << std::setw(12) << "mean" << std::setw(12) << "median" << "\n";
    auto line = [&](const char* name, const Summary& m) {
      os << "  " << std::left << std::setw(12) << name << std::right << std::setw(8) << m.count;
      if (m.count)
        os << std::setw(12) << m.mean << std::setw(12) << m.median << "\n";
      else
        os << std::setw(12) << "-" << std::setw(12) << "-" << "\n";
    };
    line("e_fx %", s.focal_fx_pct);
    line("e_fy %", s.focal_fy_pct);
    line("ball X cm", s.ball_x_cm);
    line("ball Y cm", s.ball_y_cm);
    line("ball Z cm", s.ball_z_cm);
    line("pelvis cm", s.pelvis_cm);
    line("MPJPE cm", s.mpjpe_cm);
  };
  block("all", report.overall);
  for (const auto& [sport, s] : report.per_sport) block(std::string(to_string(sport)), s);
  return os.str();
}

}  // namespace courtlab
