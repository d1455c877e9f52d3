#include "courtlab/evaluation.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace courtlab;

namespace {

QAItem float_item(std::string id, double gt, Subcategory sub = Subcategory::object_object,
                  Sport sport = Sport::tennis) {
  QAItem i;
  i.id = std::move(id);
  i.sport = sport;
  i.subcategory = sub;
  i.answer_type = AnswerType::float_meters;
  i.ground_truth = gt;
  return i;
}

QAItem mcq_item(std::string id, std::string letter, Subcategory sub = Subcategory::ball_zone) {
  QAItem i;
  i.id = std::move(id);
  i.subcategory = sub;
  i.answer_type = AnswerType::mcq;
  i.ground_truth = std::move(letter);
  return i;
}

Prediction raw(std::string id, std::string text) {
  Prediction p;
  p.item_id = std::move(id);
  p.raw_text = std::move(text);
  return p;
}

}  // namespace

TEST(TMra, GoldenValues) {
  EXPECT_EQ(t_mra(2.0, 2.0), 1.0);
  EXPECT_EQ(t_mra(2.0, 2.3, 0.15), 0.9);
  EXPECT_EQ(t_mra(2.0, 4.0, 0.15), 0.0);
  EXPECT_THROW(t_mra(0.0, 1.0), Error);
  EXPECT_THROW(t_mra(-1.0, 1.0), Error);
}

TEST(TMra, MatchesThresholdEnumeration) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> y(0.1, 20.0), e(-10.0, 10.0), T(0.0, 0.5);
  for (int i = 0; i < 5000; ++i) {
    const double gt = y(rng), pred = gt + e(rng), thr = T(rng);
    const double rel = (std::abs(pred - gt) - thr) / gt;
    int hits = 0;
    for (double theta : {0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95})
      if (rel < 1.0 - theta) ++hits;
    EXPECT_EQ(t_mra(gt, pred, thr), hits / 10.0);
  }
}

TEST(TMra, MonotoneInErrorAndThreshold) {
  for (double err = 0.0; err < 5.0; err += 0.01) {
    EXPECT_GE(t_mra(3.0, 3.0 + err), t_mra(3.0, 3.0 + err + 0.01));
    EXPECT_LE(t_mra(3.0, 3.0 + err, 0.1), t_mra(3.0, 3.0 + err, 0.2));
  }
}

TEST(Parse, StrictFormats) {
  EXPECT_EQ(std::get<double>(*parse_answer("2.54", AnswerType::float_meters, ParseMode::strict)), 2.54);
  EXPECT_EQ(std::get<Vec3>(*parse_answer("(1.2, 3.4, 0.0)", AnswerType::coordinate_3d, ParseMode::strict)),
            Vec3(1.2, 3.4, 0.0));
  EXPECT_EQ(std::get<long long>(*parse_answer(" 3\n", AnswerType::integer, ParseMode::strict)), 3);
  EXPECT_EQ(std::get<std::string>(*parse_answer("B", AnswerType::mcq, ParseMode::strict)), "B");
  EXPECT_FALSE(parse_answer("The answer is B.", AnswerType::mcq, ParseMode::strict));
  EXPECT_FALSE(parse_answer("3.0", AnswerType::integer, ParseMode::strict));
  EXPECT_FALSE(parse_answer("about 2 m", AnswerType::float_meters, ParseMode::strict));
}

TEST(Parse, LenientTakesTheLastValue) {
  EXPECT_EQ(std::get<std::string>(*parse_answer("The answer is B.", AnswerType::mcq, ParseMode::lenient)), "B");
  EXPECT_EQ(std::get<double>(*parse_answer("between 2 and 2.5 meters, so 2.5", AnswerType::float_meters,
                                           ParseMode::lenient)),
            2.5);
  EXPECT_EQ(std::get<Vec3>(*parse_answer("I think [1, 2, 3]", AnswerType::coordinate_3d, ParseMode::lenient)),
            Vec3(1, 2, 3));
  EXPECT_EQ(std::get<long long>(*parse_answer("I count 4 players", AnswerType::integer, ParseMode::lenient)), 4);
  EXPECT_FALSE(parse_answer("no idea", AnswerType::float_meters, ParseMode::lenient));
  EXPECT_FALSE(parse_answer("no idea", AnswerType::float_meters, ParseMode::none));
}

TEST(Parse, StrictIsASubsetOfLenient) {
  const std::vector<std::pair<std::string, AnswerType>> cases = {
      {"2.54", AnswerType::float_meters}, {"-0.5", AnswerType::float_meters},
      {"1e2", AnswerType::float_meters},  {"(1.2, 3.4, 0.0)", AnswerType::coordinate_3d},
      {"7", AnswerType::integer},         {"A", AnswerType::mcq},
      {" D ", AnswerType::mcq}};
  for (const auto& [text, type] : cases) {
    const auto s = parse_answer(text, type, ParseMode::strict);
    const auto l = parse_answer(text, type, ParseMode::lenient);
    ASSERT_TRUE(s) << text;
    ASSERT_TRUE(l) << text;
    EXPECT_EQ(*s, *l) << text;
  }
}

TEST(Parse, PredictionRecordsMode) {
  EXPECT_EQ(parse_prediction("x", "B", AnswerType::mcq).mode, ParseMode::strict);
  EXPECT_EQ(parse_prediction("x", "so B", AnswerType::mcq).mode, ParseMode::lenient);
  const auto none = parse_prediction("x", "no idea", AnswerType::mcq);
  EXPECT_EQ(none.mode, ParseMode::none);
  EXPECT_FALSE(none.parsed);
}

TEST(Score, LocalizationThirtyCentimeterRule) {
  QAItem i;
  i.answer_type = AnswerType::coordinate_3d;
  i.ground_truth = Vec3(1.0, 2.0, 0.0);
  // error sqrt(0.03) ~ 0.173 m
  EXPECT_EQ(score_item(i, parse_prediction("x", "(1.1, 2.1, 0.1)", i.answer_type)).score, 1.0);
  EXPECT_EQ(score_item(i, parse_prediction("x", "(1.2, 2.2, 0.2)", i.answer_type)).score, 0.0);
}

TEST(Score, ExactMatchAndUnparsed) {
  const auto m = mcq_item("a", "B");
  EXPECT_EQ(score_item(m, parse_prediction("a", "B", AnswerType::mcq)).score, 1.0);
  EXPECT_EQ(score_item(m, parse_prediction("a", "C", AnswerType::mcq)).score, 0.0);
  const auto f = float_item("f", 2.0);
  const auto s = score_item(f, parse_prediction("f", "no idea", AnswerType::float_meters));
  EXPECT_EQ(s.score, 0.0);
  EXPECT_FALSE(s.parsed);
  Prediction wrong_type;
  wrong_type.parsed = std::string("B");
  const auto t = score_item(f, wrong_type);
  EXPECT_TRUE(t.type_mismatch);
  EXPECT_EQ(t.score, 0.0);
}

TEST(Aggregate, HalfCorrectCell) {
  std::vector<QAItem> items = {mcq_item("1", "A"), mcq_item("2", "A"), mcq_item("3", "A"), mcq_item("4", "A")};
  std::vector<Prediction> preds = {raw("1", "A"), raw("2", "B"), raw("3", "A"), raw("4", "C")};
  const auto r = aggregate(items, preds);
  EXPECT_EQ(r.per_subcategory.at(Subcategory::ball_zone).accuracy(), 50.0);
  EXPECT_EQ(r.overall.accuracy(), 50.0);
  EXPECT_EQ(r.missing, 0u);
}

TEST(Aggregate, AllCorrectIsHundredEverywhere) {
  std::vector<QAItem> items = {float_item("1", 2.0), mcq_item("2", "C"), float_item("3", 5.0, Subcategory::height, Sport::badminton)};
  std::vector<Prediction> preds = {raw("1", "2.0"), raw("2", "C"), raw("3", "5")};
  const auto r = aggregate(items, preds);
  for (const auto& [sub, c] : r.per_subcategory) EXPECT_EQ(c.accuracy(), 100.0);
  for (const auto& [sport, c] : r.per_sport) EXPECT_EQ(c.accuracy(), 100.0);
  EXPECT_EQ(r.overall.accuracy(), 100.0);
  EXPECT_EQ(r.macro, 100.0);
}

TEST(Aggregate, MicroOverallMatchesRecomputation) {
  std::mt19937_64 rng(3);
  std::vector<QAItem> items;
  std::vector<Prediction> preds;
  std::uniform_real_distribution<double> u(0.5, 10.0), e(-2.0, 2.0);
  for (int i = 0; i < 500; ++i) {
    const auto sub = kAllSubcategories[i % kSubcategoryCount];
    const double gt = u(rng);
    items.push_back(float_item(std::to_string(i), gt, sub, kBenchSports[i % 3]));
    if (i % 17) preds.push_back(raw(std::to_string(i), std::to_string(gt + e(rng))));
  }
  const auto r = aggregate(items, preds);
  double sum = 0.0;
  for (const auto& s : r.items) sum += s.score;
  EXPECT_NEAR(r.overall.accuracy(), 100.0 * sum / 500.0, 1e-12);
  EXPECT_EQ(r.missing, 30u);  // i = 0, 17, ..., 493
  EXPECT_EQ(r.unparsed, r.missing);

  double macro = 0.0;
  for (const auto& [sub, c] : r.per_subcategory) macro += c.accuracy();
  EXPECT_NEAR(r.macro, macro / static_cast<double>(r.per_subcategory.size()), 1e-12);

  // Permutation invariance of the aggregate cells.
  std::vector<QAItem> shuffled = items;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto r2 = aggregate(shuffled, preds);
  EXPECT_NEAR(r2.overall.accuracy(), r.overall.accuracy(), 1e-12);
  for (const auto& [sub, c] : r.per_subcategory)
    EXPECT_NEAR(r2.per_subcategory.at(sub).accuracy(), c.accuracy(), 1e-12);
}

TEST(Aggregate, DuplicatePredictionThrows) {
  std::vector<QAItem> items = {mcq_item("1", "A")};
  std::vector<Prediction> preds = {raw("1", "A"), raw("1", "B")};
  try {
    (void)aggregate(items, preds);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::duplicate_prediction);
  }
}

TEST(Aggregate, TableHasColumnsInReportOrder) {
  std::vector<QAItem> items = {mcq_item("1", "A"), float_item("2", 1.0, Subcategory::camera_object)};
  std::vector<Prediction> preds = {raw("1", "A")};
  const auto text = format_table(aggregate(items, preds));
  EXPECT_NE(text.find("micro"), std::string::npos);
  std::size_t last = 0;
  for (auto s : kAllSubcategories) {
    const auto at = text.find(std::string(column_label(s)));
    ASSERT_NE(at, std::string::npos) << column_label(s);
    EXPECT_GT(at, last);
    last = at;
  }
  EXPECT_NE(text.find("missing 1"), std::string::npos);
}

TEST(Curve, FullSetEqualsPlainMeanAndLowRatioFixture) {
  std::vector<QAItem> items;
  std::vector<Prediction> preds;
  for (int i = 0; i < 100; ++i) {
    auto it = float_item(std::to_string(i), 2.0, i % 2 ? Subcategory::object_line : Subcategory::object_object);
    it.meta.ratio_3d_2d = 0.001 * (i + 1);
    items.push_back(it);
    // Correct exactly on the low-ratio half.
    preds.push_back(raw(it.id, i < 50 ? "2.0" : "9.0"));
  }
  items.push_back(mcq_item("x", "A"));  // not eligible
  preds.push_back(raw("x", "A"));
  const auto r = aggregate(items, preds);
  const std::vector<double> grid = {10, 25, 50, 75, 100};
  const auto c = ambiguity_curve(items, r, grid);
  ASSERT_EQ(c.size(), grid.size());
  EXPECT_EQ(c.back().count, 100u);
  EXPECT_DOUBLE_EQ(c.back().accuracy, 50.0);
  EXPECT_EQ(c[0].accuracy, 0.0);   // top 10% by ratio are the wrong ones
  EXPECT_EQ(c[2].accuracy, 0.0);
  EXPECT_GT(c[3].accuracy, c[2].accuracy);
  for (std::size_t i = 1; i < c.size(); ++i) EXPECT_GE(c[i].accuracy, c[i - 1].accuracy);
}

TEST(Curve, UniformScoresGiveAFlatCurve) {
  std::vector<QAItem> items;
  std::vector<Prediction> preds;
  for (int i = 0; i < 40; ++i) {
    auto it = float_item(std::to_string(i), 2.0);
    it.meta.ratio_3d_2d = 0.01 * ((i * 7) % 40);
    items.push_back(it);
    preds.push_back(raw(it.id, "2.0"));
  }
  const auto r = aggregate(items, preds);
  const std::vector<double> grid = {5, 30, 60, 100};
  for (const auto& p : ambiguity_curve(items, r, grid)) EXPECT_EQ(p.accuracy, 100.0);
}

TEST(Curve, EmptyEligibleSetThrows) {
  std::vector<QAItem> items = {mcq_item("1", "A")};
  std::vector<Prediction> preds = {raw("1", "A")};
  const auto r = aggregate(items, preds);
  const std::vector<double> grid = {50};
  EXPECT_THROW(ambiguity_curve(items, r, grid), Error);
}
