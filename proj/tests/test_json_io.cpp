#include "courtlab/json_io.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace courtlab;

TEST(JsonIo, CameraRoundTripIsExact) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    const auto c = random_broadcast_camera(court_spec(kBenchSports[i % 3]), rng);
    const auto back = camera_from_json(Json::parse(camera_to_json(c).dump()));
    EXPECT_EQ(back.rotation, c.rotation);
    EXPECT_EQ(back.translation, c.translation);
    EXPECT_EQ(back.fx, c.fx);
    EXPECT_EQ(back.cy, c.cy);
    EXPECT_EQ(back.image_size.width, c.image_size.width);
  }
}

TEST(JsonIo, SceneRoundTrip) {
  const auto s = synthetic_scene(court_spec(Sport::tennis), 5, "rt");
  const auto j = scene_to_json(s);
  const auto back = scene_from_json(Json::parse(j.dump()));
  EXPECT_EQ(dump_document(scene_to_json(back)), dump_document(j));
}

TEST(JsonIo, SceneWithoutLabelsGetsThemFromBboxes) {
  auto j = scene_to_json(testsupport::make_scene(
      Sport::tennis, {{Vec3(1, 1, 1), Vec2(1, 0)}, {Vec3(2, 2, 1), Vec2(0, 1)}}, std::nullopt));
  for (auto& p : j["players"]) p.erase("label");
  std::swap(j["players"][0], j["players"][1]);
  const auto s = scene_from_json(j);
  EXPECT_EQ(s.players[0].player_id, "p1");
  EXPECT_EQ(s.players[0].label, 2);
  EXPECT_EQ(s.players[1].label, 1);
}

TEST(JsonIo, SceneFieldErrorsNamePaths) {
  auto j = scene_to_json(synthetic_scene(court_spec(Sport::tennis), 5, "rt"));
  j["players"][0]["pelvis"] = "nope";
  try {
    (void)scene_from_json(j);
    FAIL();
  } catch (const FieldError& e) {
    EXPECT_EQ(e.field(), "players[0].pelvis");
  }
  j = scene_to_json(synthetic_scene(court_spec(Sport::tennis), 5, "rt"));
  j.erase("camera");
  EXPECT_THROW(scene_from_json(j), FieldError);
}

TEST(JsonIo, QaItemsRoundTripByteIdentically) {
  const auto& m = default_template_manifest();
  const auto& spec = court_spec(Sport::badminton);
  const auto s = synthetic_scene(spec, 99, "qa-rt");
  int n = 0;
  for (const auto& t : m.templates) {
    auto r = instantiate(t, s, spec, m, 4);
    if (!r.item) continue;
    r.item->id = "x-" + std::to_string(n++);
    const std::string line = dump_line(qa_item_to_json(*r.item));
    const auto back = qa_item_from_json(Json::parse(line));
    EXPECT_EQ(dump_line(qa_item_to_json(back)), line);
    EXPECT_EQ(back.ground_truth, r.item->ground_truth);
    ASSERT_EQ(back.options.size(), r.item->options.size());
    for (std::size_t i = 0; i < back.options.size(); ++i) EXPECT_EQ(back.options[i].key, r.item->options[i].key);
  }
  EXPECT_GT(n, 30);
}

TEST(JsonIo, InfiniteRatioSurvivesTheRoundTrip) {
  QAItem item;
  item.id = "inf";
  item.subcategory = Subcategory::object_object;
  item.ground_truth = 1.0;
  item.meta.ratio_3d_2d = std::numeric_limits<double>::infinity();
  item.meta.flags.push_back("ratio_infinite");
  const auto j = qa_item_to_json(item);
  EXPECT_TRUE(j["meta"]["ratio_3d_2d"].is_null());
  const auto back = qa_item_from_json(j);
  ASSERT_TRUE(back.meta.ratio_3d_2d);
  EXPECT_TRUE(std::isinf(*back.meta.ratio_3d_2d));
}

TEST(JsonIo, QaFileAndPredictions) {
  testsupport::TempDir dir("jsonio");
  const auto& m = default_template_manifest();
  const auto& spec = court_spec(Sport::tennis);
  const auto s = synthetic_scene(spec, 3, "file");
  std::vector<QAItem> items;
  for (const auto& t : m.templates)
    if (auto r = instantiate(t, s, spec, m, 1); r.item) {
      r.item->id = "i" + std::to_string(items.size());
      items.push_back(*r.item);
    }
  write_qa_file(dir / "a.qa", items);
  const auto back = read_qa_file(dir / "a.qa");
  ASSERT_EQ(back.size(), items.size());
  write_qa_file(dir / "b.qa", back);
  EXPECT_EQ(read_text_file(dir / "a.qa"), read_text_file(dir / "b.qa"));

  write_text_file(dir / "p.jsonl", "{\"item_id\": \"i0\", \"raw_text\": \"B\"}\n\n{\"item_id\": \"i1\", \"raw_text\": \"2.5\"}\n");
  const auto preds = read_predictions(dir / "p.jsonl");
  ASSERT_EQ(preds.size(), 2u);
  EXPECT_EQ(preds[1].raw_text, "2.5");
  write_text_file(dir / "bad.jsonl", "{\"item_id\": \"i0\"}\n");
  try {
    (void)read_predictions(dir / "bad.jsonl");
    FAIL();
  } catch (const FieldError& e) {
    EXPECT_EQ(e.field(), "line 1.raw_text");
  }
  write_text_file(dir / "broken.jsonl", "{\n");
  EXPECT_THROW(read_jsonl(dir / "broken.jsonl"), Error);
  EXPECT_THROW(read_text_file(dir / "missing"), Error);
}

TEST(JsonIo, TargetsRoundTripAndValidation) {
  const auto t = DistributionTargets::bench();
  const auto back = targets_from_json(Json::parse(targets_to_json(t).dump()));
  EXPECT_EQ(back.counts, t.counts);
  try {
    (void)targets_from_json(Json{{"height", {{"squash", 3}}}});
    FAIL();
  } catch (const FieldError& e) {
    EXPECT_EQ(e.field(), "targets.height.squash");
  }
  EXPECT_THROW(targets_from_json(Json{{"height", {{"tennis", -1}}}}), FieldError);
  EXPECT_THROW(targets_from_json(Json{{"no_such", {{"tennis", 1}}}}), FieldError);
  EXPECT_THROW(targets_from_json(Json::array()), FieldError);
}

TEST(JsonIo, TrajectoryRoundTrip) {
  TrajectorySegment s;
  s.t0 = 0.2;
  s.t_end = 1.4;
  s.p0 = Vec3(1, 2, 3);
  s.v0 = Vec3(4, -5, 6);
  s.acceleration = Vec3(0, 0, -9.8);
  s.frame_rate = 50;
  const auto back = trajectory_from_json(Json::parse(trajectory_to_json(s).dump()));
  EXPECT_EQ(back.p0, s.p0);
  EXPECT_EQ(back.v0, s.v0);
  EXPECT_EQ(back.acceleration, s.acceleration);
  EXPECT_EQ(back.t_end, s.t_end);
}

TEST(JsonIo, DocumentDumpIsSortedAndNewlineTerminated) {
  const Json j = Json::parse(R"({"b": 1, "a": {"d": 2, "c": 3}})");
  EXPECT_EQ(dump_document(j), "{\n  \"a\": {\n    \"c\": 3,\n    \"d\": 2\n  },\n  \"b\": 1\n}\n");
  EXPECT_EQ(dump_line(j), R"({"a":{"c":3,"d":2},"b":1})");
}

TEST(JsonIo, OracleRecordTriangulatesViews) {
  std::mt19937_64 rng(2);
  const auto& spec = court_spec(Sport::badminton);
  const Vec3 ball(4, 3, 2), pelvis(9, 2, 1);
  Json views = Json::array();
  for (int k = 0; k < 3; ++k) {
    const auto cam = random_broadcast_camera(spec, rng);
    views.push_back(Json{{"camera", camera_to_json(cam)},
                         {"ball", to_json(*testsupport::pinhole(cam, ball))},
                         {"joints", {{"p1", {{"pelvis", to_json(*testsupport::pinhole(cam, pelvis))}}}}}});
  }
  const auto r = oracle_record_from_json(Json{{"frame_id", "f"}, {"sport", "badminton"}, {"views", views}});
  ASSERT_TRUE(r.ball);
  EXPECT_LT((*r.ball - ball).norm(), 1e-9);
  EXPECT_LT((r.players.at("p1").at("pelvis") - pelvis).norm(), 1e-9);
  ASSERT_TRUE(r.camera);

  const auto e = engine_record_from_json(Json{{"frame_id", "f"}, {"sport", "badminton"}, {"ball", to_json(ball)}});
  EXPECT_EQ(*e.ball, ball);
  EXPECT_FALSE(e.camera);
}

TEST(JsonIo, FieldReaders) {
  EXPECT_EQ(read_vec2(Json::array({1, 2}), "p"), Vec2(1, 2));
  try {
    (void)read_vec3(Json::array({1, 2}), "p.q");
    FAIL();
  } catch (const FieldError& e) {
    EXPECT_EQ(e.field(), "p.q");
  }
  EXPECT_THROW(read_int(Json(1.5), "n"), FieldError);
  EXPECT_THROW(read_string(Json(1), "s"), FieldError);
  EXPECT_THROW(field(Json::object(), "k", "obj"), FieldError);
}
