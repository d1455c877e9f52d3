#include "courtlab/lifting.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace courtlab;
using testsupport::downward_camera;
using testsupport::pinhole;

TEST(PixelRay, PrincipalPixelFollowsOpticalAxis) {
  std::mt19937_64 rng(1);
  const auto cam = random_broadcast_camera(court_spec(Sport::tennis), rng);
  const auto r = pixel_ray(cam, Vec2(cam.cx, cam.cy));
  EXPECT_NEAR((r.direction - cam.optical_axis()).norm(), 0.0, 1e-12);
  EXPECT_NEAR((r.origin - cam.center()).norm(), 0.0, 1e-9);
}

TEST(PixelRay, DownwardCameraHandComputed) {
  const auto cam = downward_camera();
  const auto r = pixel_ray(cam, Vec2(600, 500));
  const Vec3 want = Vec3(0.1, 0, -1).normalized();
  EXPECT_NEAR((r.direction - want).norm(), 0.0, 1e-12);
  EXPECT_NEAR((r.origin - Vec3(0, 0, 5)).norm(), 0.0, 1e-12);
}

TEST(PixelRay, ReprojectsToSourcePixelForAnyLambda) {
  std::mt19937_64 rng(2);
  const auto cam = random_broadcast_camera(court_spec(Sport::badminton), rng);
  for (int i = 0; i < 200; ++i) {
    const Vec2 px(courtlab::uniform(rng, 0, 1920), courtlab::uniform(rng, 0, 1080));
    const auto r = pixel_ray(cam, px);
    const double lambda = courtlab::uniform(rng, 0.1, 100);
    const auto pr = project(cam, eval_ray(r, lambda));
    EXPECT_NEAR((pr.pixel - px).norm(), 0.0, 1e-9);
  }
}

TEST(IntersectPlane, DownwardCamera) {
  const auto cam = downward_camera();
  const auto h0 = intersect_plane(pixel_ray(cam, Vec2(500, 500)), 0.0);
  EXPECT_NEAR((h0.point - Vec3::Zero()).norm(), 0.0, 1e-12);
  EXPECT_NEAR(h0.lambda, 5.0, 1e-12);
  const auto h1 = intersect_plane(pixel_ray(cam, Vec2(600, 500)), 0.0);
  EXPECT_NEAR((h1.point - Vec3(0.5, 0, 0)).norm(), 0.0, 1e-12);
}

TEST(IntersectPlane, HorizontalRayHasNoIntersection) {
  Ray r{Vec3(0, 0, 5), Vec3(1, 0, 0), Vec2::Zero()};
  try {
    (void)intersect_plane(r, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::no_intersection);
  }
}

TEST(IntersectPlane, RoundTripThroughTheCamera) {
  std::mt19937_64 rng(3);
  const auto& spec = court_spec(Sport::tennis);
  const auto cam = random_broadcast_camera(spec, rng);
  for (int i = 0; i < 200; ++i) {
    const Vec3 g(courtlab::uniform(rng, 0, spec.length_m), courtlab::uniform(rng, 0, spec.width_m), 0);
    const Vec2 px = *pinhole(cam, g);
    const auto hit = intersect_plane(pixel_ray(cam, px), 0.0);
    EXPECT_NEAR((project(cam, hit.point).pixel - px).norm(), 0.0, 1e-9);
  }
}

TEST(ProjectionLine, VerticalRayGivesSinglePoint) {
  const auto cam = downward_camera();
  const auto seg = projection_line(cam, Vec2(500, 500), 1.0, 4.0, 0.0);
  EXPECT_TRUE(seg.degenerate);
  EXPECT_NEAR((seg.a - seg.b).norm(), 0.0, 1e-12);
  EXPECT_NEAR((seg.a - Vec2(500, 500)).norm(), 0.0, 1e-9);
}

TEST(ProjectionLine, DenseSamplesLieOnTheSegment) {
  std::mt19937_64 rng(4);
  const auto& spec = court_spec(Sport::badminton);
  for (int trial = 0; trial < 20; ++trial) {
    const auto cam = random_broadcast_camera(spec, rng);
    const Vec3 ball(courtlab::uniform(rng, 1, 12), courtlab::uniform(rng, 0, 6), courtlab::uniform(rng, 0.5, 4));
    const Vec2 px = *pinhole(cam, ball);
    const auto r = pixel_ray(cam, px);
    const double lmax = intersect_plane(r, 0.0).lambda;
    const double lmin = 0.3 * lmax;
    const auto seg = projection_line(cam, px, lmin, lmax, 0.0);
    for (int k = 0; k <= 100; ++k) {
      const double l = lmin + (lmax - lmin) * k / 100.0;
      const Vec3 X = r.at(l);
      const auto g = pinhole(cam, Vec3(X.x(), X.y(), 0.0));
      ASSERT_TRUE(g);
      EXPECT_LT(point_segment_distance(*g, seg), 1e-6);
    }
  }
}

TEST(ProjectionLine, PointOnThePlaneIsItsOwnGroundProjection) {
  std::mt19937_64 rng(5);
  const auto cam = random_broadcast_camera(court_spec(Sport::tennis), rng);
  const Vec3 g(10, 4, 0);
  const Vec2 px = *pinhole(cam, g);
  const double l = intersect_plane(pixel_ray(cam, px), 0.0).lambda;
  const auto seg = projection_line(cam, px, 0.5 * l, l, 0.0);
  EXPECT_NEAR((seg.b - px).norm(), 0.0, 1e-6);
}

TEST(AssistiveLine, SegmentEndsInsideImage) {
  std::mt19937_64 rng(6);
  const auto& spec = court_spec(Sport::tennis);
  const auto cam = random_broadcast_camera(spec, rng);
  const Vec2 px = *pinhole(cam, Vec3(12, 5, 1.2));
  const auto line = assistive_line(cam, px, 0.0);
  ASSERT_TRUE(line.visible);
  for (const Vec2& e : {line.segment.a, line.segment.b}) {
    EXPECT_GE(e.x(), -1e-9);
    EXPECT_LE(e.x(), cam.image_size.width + 1e-9);
    EXPECT_GE(e.y(), -1e-9);
    EXPECT_LE(e.y(), cam.image_size.height + 1e-9);
  }
  EXPECT_LT(line.lambda_min, line.lambda_max);
}

TEST(LiftBall, KnownPointRecovered) {
  std::mt19937_64 rng(7);
  const auto cam = random_broadcast_camera(court_spec(Sport::tennis), rng);
  const Vec3 ball(3.2, 2.5, 1.8);
  const auto r = lift_ball(cam, *pinhole(cam, ball), *pinhole(cam, Vec3(3.2, 2.5, 0)), 0.0);
  EXPECT_NEAR((r.point - ball).norm(), 0.0, 1e-6);
  EXPECT_LT(r.residual_m, 1e-6);
  EXPECT_FALSE(r.inconsistent_click);
}

TEST(LiftBall, CoincidentClickGivesPlaneHit) {
  std::mt19937_64 rng(8);
  const auto cam = random_broadcast_camera(court_spec(Sport::badminton), rng);
  const Vec2 px = *pinhole(cam, Vec3(5, 3, 0));
  const auto r = lift_ball(cam, px, px, 0.0);
  const auto hit = intersect_plane(pixel_ray(cam, px), 0.0);
  EXPECT_NEAR((r.point - hit.point).norm(), 0.0, 1e-9);
  EXPECT_NEAR(r.point.z(), 0.0, 1e-9);
  EXPECT_NEAR(r.residual_m, 0.0, 1e-9);
}

TEST(LiftBall, OffLineClickIsInconsistent) {
  std::mt19937_64 rng(9);
  const auto cam = random_broadcast_camera(court_spec(Sport::tennis), rng);
  const Vec3 ball(8, 4, 1.5);
  const Vec2 ground = *pinhole(cam, Vec3(8, 4, 0)) + Vec2(60, 0);
  const auto r = lift_ball(cam, *pinhole(cam, ball), ground, 0.0);
  EXPECT_TRUE(r.inconsistent_click);
  EXPECT_GT(r.residual_m, 0.05);
}

TEST(LiftBall, TableSurfaceHeight) {
  const auto& spec = court_spec(Sport::table_tennis);
  std::mt19937_64 rng(10);
  const auto cam = random_broadcast_camera(spec, rng);
  const double s = spec.surface_height_m;
  const Vec3 ball(1.0, 0.8, s + 0.3);
  const auto r = lift_ball(cam, *pinhole(cam, ball), *pinhole(cam, Vec3(1.0, 0.8, s)), s);
  EXPECT_NEAR((r.point - ball).norm(), 0.0, 1e-6);
}

TEST(Trajectory, ProjectileRecovered) {
  auto p = [](double t) -> Vec3 { return Vec3(0, 0, 3) + Vec3(1, 0, 2) * t + 0.5 * Vec3(0, 0, -9.8) * t * t; };
  const std::vector<TrajectorySample> s = {{0.0, p(0.0)}, {0.5, p(0.5)}, {1.0, p(1.0)}};
  const auto seg = fit_trajectory(s, 25.0);
  EXPECT_NEAR((seg.v0 - Vec3(1, 0, 2)).norm(), 0.0, 1e-9);
  EXPECT_NEAR((seg.acceleration - Vec3(0, 0, -9.8)).norm(), 0.0, 1e-9);
  for (const auto& x : s) EXPECT_NEAR((seg.at(x.t) - x.point).norm(), 0.0, 1e-9);
  EXPECT_EQ(seg.t0, 0.0);
  EXPECT_EQ(seg.t_end, 1.0);
}

TEST(Trajectory, StationaryPoint) {
  const Vec3 c(2, 3, 1);
  const auto seg = fit_trajectory(std::vector<TrajectorySample>{{0, c}, {1, c}, {2, c}}, 25.0);
  EXPECT_NEAR(seg.v0.norm(), 0.0, 1e-12);
  EXPECT_NEAR(seg.acceleration.norm(), 0.0, 1e-12);
}

TEST(Trajectory, NonIncreasingTimesRejected) {
  try {
    (void)fit_trajectory(std::vector<TrajectorySample>{{0, Vec3::Zero()}, {0, Vec3::Zero()}, {1, Vec3::Zero()}}, 25.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::non_increasing_times);
  }
}

TEST(Trajectory, TranslationEquivariant) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    std::vector<TrajectorySample> s;
    double t = courtlab::uniform(rng, 0, 2);
    for (int k = 0; k < 3; ++k) {
      s.push_back({t, testsupport::rand_vec(rng, Vec3(-5, -5, 0), Vec3(5, 5, 5))});
      t += courtlab::uniform(rng, 0.05, 0.5);
    }
    const Vec3 d = testsupport::rand_vec(rng, Vec3(-3, -3, -3), Vec3(3, 3, 3));
    auto moved = s;
    for (auto& x : moved) x.point += d;
    const auto a = fit_trajectory(s, 30), b = fit_trajectory(moved, 30);
    EXPECT_NEAR((b.p0 - (a.p0 + d)).norm(), 0.0, 1e-12);
    EXPECT_NEAR((b.v0 - a.v0).norm(), 0.0, 1e-9);
    EXPECT_NEAR((b.acceleration - a.acceleration).norm(), 0.0, 1e-9);
  }
}

TEST(TrajectoryQuality, SelfProjectionPassesAndOffsetFails) {
  std::mt19937_64 rng(12);
  const auto cam = random_broadcast_camera(court_spec(Sport::tennis), rng);
  auto p = [](double t) -> Vec3 { return Vec3(5, 3, 1) + Vec3(6, 1, 4) * t + 0.5 * Vec3(0, 0, -9.8) * t * t; };
  const auto seg = fit_trajectory(std::vector<TrajectorySample>{{0, p(0)}, {0.4, p(0.4)}, {0.8, p(0.8)}}, 25);
  std::vector<Detection> det, off;
  for (int k = 0; k <= 20; ++k) {
    const double t = k * 0.04;
    det.push_back({t, *pinhole(cam, p(t))});
    off.push_back({t, *pinhole(cam, p(t)) + Vec2(20, 0)});
  }
  const auto q = trajectory_quality(seg, det, cam);
  EXPECT_LT(q.mean_error_px, 1e-6);
  EXPECT_TRUE(q.pass);
  const auto q2 = trajectory_quality(seg, off, cam);
  EXPECT_FALSE(q2.pass);
  // Recompute the mean independently.
  double sum = 0;
  for (const auto& d : off) sum += (*pinhole(cam, seg.at(d.t)) - d.pixel).norm();
  EXPECT_NEAR(q2.mean_error_px, sum / off.size(), 1e-9);
}

TEST(Realign, HandComputedScale) {
  PinholeCamera cam = downward_camera();
  PlayerMesh mesh;
  mesh.player_id = "p";
  mesh.vertices = {Vec3(0.5, 0, 1)};
  const auto r = realign_mesh(cam, mesh, 0.0);
  EXPECT_NEAR(r.scale, 1.25, 1e-12);
  EXPECT_NEAR((r.mesh.vertices[0] - Vec3(0.625, 0, 0)).norm(), 0.0, 1e-12);
}

TEST(Realign, IdentityWhenAlreadyAtHeight) {
  std::mt19937_64 rng(13);
  const auto cam = random_broadcast_camera(court_spec(Sport::tennis), rng);
  PlayerMesh mesh;
  mesh.player_id = "p";
  mesh.joints = synthetic_joints(Vec3(8, 4, 1.0), 0.3, rng);
  for (const auto& [n, p] : mesh.joints) mesh.vertices.push_back(p);
  double low = 1e9;
  for (const auto& v : mesh.vertices) low = std::min(low, v.z());
  const auto r = realign_mesh(cam, mesh, low);
  EXPECT_EQ(r.scale, 1.0);
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) EXPECT_EQ(r.mesh.vertices[i], mesh.vertices[i]);
}

TEST(Realign, FacingRecomputedFromHips) {
  std::mt19937_64 rng(14);
  const auto cam = random_broadcast_camera(court_spec(Sport::badminton), rng);
  PlayerMesh mesh;
  mesh.player_id = "p";
  mesh.joints = synthetic_joints(Vec3(4, 3, 1.0), 0.0, rng);
  for (const auto& [n, p] : mesh.joints) mesh.vertices.push_back(p);
  const auto r = realign_mesh(cam, mesh, 0.0);
  const auto f = facing_from_joints(r.mesh.joints);
  ASSERT_TRUE(f);
  EXPECT_NEAR((r.mesh.facing - *f).norm(), 0.0, 1e-12);
}

TEST(Facing, HipsGiveForwardDirection) {
  // (left - right) x up = (0, 1, 0) x (0, 0, 1) = (1, 0, 0).
  std::map<std::string, Vec3> j = {{"left_hip", Vec3(0, 0.1, 1)}, {"right_hip", Vec3(0, -0.1, 1)}};
  const auto f = facing_from_joints(j);
  ASSERT_TRUE(f);
  EXPECT_NEAR((*f - Vec2(1, 0)).norm(), 0.0, 1e-12);
}

TEST(MeshFromCameraFrame, InvertsTheCameraTransform) {
  std::mt19937_64 rng(15);
  const auto cam = random_broadcast_camera(court_spec(Sport::tennis), rng);
  const Vec3 w(5, 2, 1);
  const std::vector<Vec3> v = {cam.to_camera(w)};
  const auto m = mesh_from_camera_frame(cam, "p", v, {{"pelvis", cam.to_camera(w)}});
  EXPECT_NEAR((m.vertices[0] - w).norm(), 0.0, 1e-9);
  EXPECT_NEAR((m.joints.at("pelvis") - w).norm(), 0.0, 1e-9);
}
