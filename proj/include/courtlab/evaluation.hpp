#pragma once

#include "courtlab/qa_generation.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace courtlab {

enum class ParseMode { strict, lenient, none };

std::string_view to_string(ParseMode m) noexcept;

using ParsedValue = std::variant<double, Vec3, long long, std::string>;

struct Prediction {
  std::string item_id;
  std::string raw_text;
  std::optional<ParsedValue> parsed;
  ParseMode mode = ParseMode::none;
};

/// Strict accepts exactly the post-prompt formats ("2.54", "(1.2, 3.4, 0.0)",
/// "3", "B"), surrounding whitespace aside. Lenient returns the last
/// well-formed value of the type found anywhere in the text.
std::optional<ParsedValue> parse_answer(std::string_view raw, AnswerType type, ParseMode mode);

/// Strict first, then lenient.
Prediction parse_prediction(std::string item_id, std::string raw_text, AnswerType type);

inline constexpr double kDistanceThresholdM = 0.15;
inline constexpr double kLocalizationRadiusM = 0.30;

/// Mean over theta in {0.50, 0.55, ..., 0.95} of [(|yhat - y| - T) / y < 1 - theta].
/// Throws invalid_argument for y <= 0.
double t_mra(double y, double y_hat, double T = kDistanceThresholdM);

struct ItemScore {
  std::string item_id;
  double score = 0.0;
  bool parsed = false;
  bool type_mismatch = false;
  bool missing = false;
};

ItemScore score_item(const QAItem& item, const Prediction& prediction);

struct Cell {
  double sum = 0.0;
  std::size_t count = 0;
  /// Percent; NaN for an empty cell.
  [[nodiscard]] double accuracy() const;
};

struct EvalReport {
  std::vector<ItemScore> items;  // item order
  std::map<Subcategory, Cell> per_subcategory;
  std::map<Sport, Cell> per_sport;
  std::map<Sport, std::map<Subcategory, Cell>> per_sport_subcategory;
  Cell overall;          // micro: every item weighs the same
  double macro = 0.0;    // mean of the non-empty subcategory accuracies
  std::size_t unparsed = 0;
  std::size_t missing = 0;
  std::size_t type_mismatches = 0;
};

/// Predictions are raw; parsing happens here. Items without a prediction
/// score 0 and count as missing. Throws duplicate_prediction.
EvalReport aggregate(std::span<const QAItem> items, std::span<const Prediction> predictions);

/// Fixed-width table in report column order, one row per sport plus "All".
std::string format_table(const EvalReport& report);

struct CurvePoint {
  double percent = 0.0;
  std::size_t count = 0;
  double accuracy = 0.0;  // percent
};

/// Eligible items (object-object / object-line with a ratio) sorted by
/// descending ratio; each grid point k reports the mean score of the top
/// ceil(k% * n) items. Throws empty_input when nothing is eligible.
std::vector<CurvePoint> ambiguity_curve(std::span<const QAItem> items, const EvalReport& report,
                                        std::span<const double> percent_grid);

}  // namespace courtlab
