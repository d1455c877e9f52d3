#include "courtlab/annotation_store.hpp"
#include "courtlab/json_io.hpp"
#include "support.hpp"

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>

using namespace courtlab;
using testsupport::TempDir;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(const TempDir& dir, const std::string& args) {
  const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + COURTLAB_CLI + "\" " + args + " >\"" + out.string() +
                          "\" 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_text_file(out);
  r.err = read_text_file(err);
  return r;
}

std::string quoted(const std::filesystem::path& p) { return "\"" + p.string() + "\""; }

// Predictions answering the first half of the items with the ground truth
// and the rest with a wrong value.
void write_predictions(const std::filesystem::path& qa, const std::filesystem::path& out, bool drop_last) {
  const auto items = read_qa_file(qa);
  std::string text;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (drop_last && i + 1 == items.size()) break;
    const auto& it = items[i];
    const bool wrong = i % 2 == 1;
    std::string answer;
    if (const auto* s = std::get_if<std::string>(&it.ground_truth)) {
      answer = wrong ? "Z" : *s;
    } else if (const auto* d = std::get_if<double>(&it.ground_truth)) {
      answer = std::to_string(wrong ? *d * 10 + 5 : *d);
    } else if (const auto* n = std::get_if<long long>(&it.ground_truth)) {
      answer = std::to_string(wrong ? *n + 7 : *n);
    } else {
      const Vec3 v = std::get<Vec3>(it.ground_truth) + (wrong ? Vec3(5, 5, 5) : Vec3::Zero());
      char buf[128];
      std::snprintf(buf, sizeof buf, "(%.6f, %.6f, %.6f)", v.x(), v.y(), v.z());
      answer = buf;
    }
    text += dump_line(Json{{"item_id", it.id}, {"raw_text", answer}}) + "\n";
  }
  write_text_file(out, text);
}

}  // namespace

TEST(Cli, GenQaIsByteIdenticalAcrossRuns) {
  TempDir dir("cli");
  const std::string common = "gen-qa --synthetic 40 --seed 21 --out ";
  const auto a = run(dir, common + quoted(dir / "a.jsonl") + " --threads 3");
  ASSERT_EQ(a.code, 0) << a.err;
  const auto b = run(dir, common + quoted(dir / "b.jsonl") + " --threads 1");
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(read_text_file(dir / "a.jsonl"), read_text_file(dir / "b.jsonl"));
  EXPECT_EQ(read_text_file(dir / "a.jsonl.manifest.json"), read_text_file(dir / "b.jsonl.manifest.json"));
  EXPECT_NE(a.out.find("/ target 3686"), std::string::npos);
  EXPECT_FALSE(read_qa_file(dir / "a.jsonl").empty());
}

TEST(Cli, EvalIsDeterministicAndMissingPredictionsNeedAFlag) {
  TempDir dir("cli");
  ASSERT_EQ(run(dir, "gen-qa --synthetic 20 --seed 4 --out " + quoted(dir / "qa.jsonl")).code, 0);
  write_predictions(dir / "qa.jsonl", dir / "pred.jsonl", false);
  const std::string args = "eval --qa " + quoted(dir / "qa.jsonl") + " --pred " + quoted(dir / "pred.jsonl");
  const auto a = run(dir, args + " --report " + quoted(dir / "r1.json"));
  ASSERT_EQ(a.code, 0) << a.err;
  const auto b = run(dir, args + " --report " + quoted(dir / "r2.json"));
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(read_text_file(dir / "r1.json"), read_text_file(dir / "r2.json"));
  EXPECT_NE(a.out.find("missing 0"), std::string::npos);
  const double overall = read_json_file(dir / "r1.json")["overall"]["accuracy"];
  EXPECT_GT(overall, 40.0);
  EXPECT_LT(overall, 60.0);

  write_predictions(dir / "qa.jsonl", dir / "short.jsonl", true);
  const std::string shorter = "eval --qa " + quoted(dir / "qa.jsonl") + " --pred " + quoted(dir / "short.jsonl");
  const auto missing = run(dir, shorter);
  EXPECT_EQ(missing.code, 1);
  EXPECT_NE(missing.err.find("--allow-missing"), std::string::npos);
  const auto allowed = run(dir, shorter + " --allow-missing");
  EXPECT_EQ(allowed.code, 0) << allowed.err;
  EXPECT_NE(allowed.out.find("missing 1"), std::string::npos);

  const auto curve = run(dir, "report --qa " + quoted(dir / "qa.jsonl") + " --pred " + quoted(dir / "pred.jsonl"));
  EXPECT_EQ(curve.code, 0) << curve.err;
  EXPECT_NE(curve.out.find("100.00"), std::string::npos);
}

TEST(Cli, CalibrateStoredClicks) {
  TempDir dir("cli");
  std::mt19937_64 rng(31);
  const auto& spec = court_spec(Sport::badminton);
  const auto cam = random_broadcast_camera(spec, rng);
  Json clicks = Json::object();
  for (auto n : kCornerNames) clicks[std::string(n)] = to_json(*testsupport::pinhole(cam, spec.keypoints.at(std::string(n))));
  for (auto n : kNetNames) clicks[std::string(n)] = to_json(*testsupport::pinhole(cam, spec.keypoints.at(std::string(n))));
  {
    AnnotationStore store(dir / "store");
    auto doc = new_scene_document("m1", Sport::badminton, cam.image_size);
    doc["frames"]["000001"]["court_clicks"] = clicks;
    store.write("m1", doc, 0);
  }
  const auto r = run(dir, "calibrate --store " + quoted(dir / "store") + " --scene m1 --frame 000001");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("rmse_px"), std::string::npos);
  const auto doc = read_json_file(dir / "store" / "m1.json");
  const auto solved = camera_from_json(doc["frames"]["000001"]["camera"]);
  EXPECT_NEAR(solved.fx / cam.fx, 1.0, 1e-6);
  EXPECT_EQ(doc["version"], 2);

  // Standalone mode with a clicks file.
  write_text_file(dir / "clicks.json", dump_document(Json{{"sport", "badminton"},
                                                          {"image_width", cam.image_size.width},
                                                          {"image_height", cam.image_size.height},
                                                          {"clicks", clicks}}));
  const auto s = run(dir, "calibrate --clicks " + quoted(dir / "clicks.json") + " --out " + quoted(dir / "cal.json"));
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_EQ(read_json_file(dir / "cal.json")["camera"], doc["frames"]["000001"]["camera"]);
}

TEST(Cli, LiftBallStandalone) {
  TempDir dir("cli");
  std::mt19937_64 rng(5);
  const auto cam = random_broadcast_camera(court_spec(Sport::tennis), rng);
  write_text_file(dir / "cam.json", dump_document(camera_to_json(cam)));
  const Vec3 ball(10, 5, 1.5);
  const Vec2 px = *testsupport::pinhole(cam, ball), g = *testsupport::pinhole(cam, Vec3(10, 5, 0));
  char args[256];
  std::snprintf(args, sizeof args, " --sport tennis --pixel %.17g,%.17g --ground %.17g,%.17g", px.x(), px.y(),
                g.x(), g.y());
  const auto r = run(dir, "lift-ball --camera " + quoted(dir / "cam.json") + args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LT((read_vec3(Json::parse(r.out)["point"], "point") - ball).norm(), 1e-6);
}

TEST(Cli, ExitCodes) {
  TempDir dir("cli");
  EXPECT_EQ(run(dir, "no-such-command").code, 2);
  EXPECT_EQ(run(dir, "").code, 2);
  EXPECT_EQ(run(dir, "gen-qa --seed 1 --out " + quoted(dir / "x")).code, 1);  // no scene source
  const auto bad = run(dir, "lift-ball --pixel 1x2 --ground 3,4 --camera " + quoted(dir / "missing.json"));
  EXPECT_NE(bad.code, 0);
  EXPECT_EQ(run(dir, "--help").code, 0);
}
