#include "courtlab/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <regex>
#include <set>
#include <sstream>
#include <unordered_map>

namespace courtlab {

namespace {

const std::string kNum = R"([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)";

const std::regex& strict_float() {
  static const std::regex re("^\\s*(" + kNum + ")\\s*$");
  return re;
}
const std::regex& strict_int() {
  static const std::regex re(R"(^\s*([-+]?\d+)\s*$)");
  return re;
}
const std::regex& strict_coord() {
  static const std::regex re("^\\s*\\(\\s*(" + kNum + ")\\s*,\\s*(" + kNum + ")\\s*,\\s*(" + kNum +
                             ")\\s*\\)\\s*$");
  return re;
}
const std::regex& strict_letter() {
  static const std::regex re(R"(^\s*([A-D])\s*$)");
  return re;
}
const std::regex& any_number() {
  static const std::regex re(kNum);
  return re;
}
const std::regex& any_coord() {
  static const std::regex re("[\\(\\[]\\s*(" + kNum + ")\\s*,\\s*(" + kNum + ")\\s*,\\s*(" + kNum +
                             ")\\s*[\\)\\]]");
  return re;
}
const std::regex& any_letter() {
  static const std::regex re(R"((?:^|[^A-Za-z])([A-D])(?=$|[^A-Za-z]))");
  return re;
}

std::optional<double> to_double(const std::string& s) {
  std::string_view v = s;
  if (!v.empty() && v.front() == '+') v.remove_prefix(1);
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) return std::nullopt;
  return out;
}

std::optional<long long> to_int(const std::string& s) {
  std::string_view v = s;
  if (!v.empty() && v.front() == '+') v.remove_prefix(1);
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) return std::nullopt;
  return out;
}

std::optional<ParsedValue> coord_from(const std::smatch& m) {
  auto x = to_double(m[1].str()), y = to_double(m[2].str()), z = to_double(m[3].str());
  if (!x || !y || !z) return std::nullopt;
  return Vec3(*x, *y, *z);
}

template <class F>
std::optional<ParsedValue> last_match(const std::string& text, const std::regex& re, F convert) {
  std::optional<ParsedValue> last;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it)
    if (auto v = convert(*it)) last = v;
  return last;
}

bool is_integer_token(const std::string& s) {
  return s.find_first_of(".eE") == std::string::npos;
}

}  // namespace

std::string_view to_string(ParseMode m) noexcept {
  switch (m) {
    case ParseMode::strict: return "strict";
    case ParseMode::lenient: return "lenient";
    case ParseMode::none: return "none";
  }
  return "none";
}

std::optional<ParsedValue> parse_answer(std::string_view raw, AnswerType type, ParseMode mode) {
  const std::string text(raw);
  std::smatch m;
  if (mode == ParseMode::none) return std::nullopt;
  if (mode == ParseMode::strict) {
    switch (type) {
      case AnswerType::float_meters:
        if (std::regex_match(text, m, strict_float()))
          if (auto v = to_double(m[1].str())) return *v;
        return std::nullopt;
      case AnswerType::integer:
        if (std::regex_match(text, m, strict_int()))
          if (auto v = to_int(m[1].str())) return *v;
        return std::nullopt;
      case AnswerType::coordinate_3d:
        if (std::regex_match(text, m, strict_coord())) return coord_from(m);
        return std::nullopt;
      case AnswerType::mcq:
        if (std::regex_match(text, m, strict_letter())) return m[1].str();
        return std::nullopt;
    }
    return std::nullopt;
  }
  switch (type) {
    case AnswerType::float_meters:
      return last_match(text, any_number(), [](const std::smatch& s) -> std::optional<ParsedValue> {
        if (auto v = to_double(s[0].str())) return *v;
        return std::nullopt;
      });
    case AnswerType::integer:
      return last_match(text, any_number(), [](const std::smatch& s) -> std::optional<ParsedValue> {
        if (!is_integer_token(s[0].str())) return std::nullopt;
        if (auto v = to_int(s[0].str())) return *v;
        return std::nullopt;
      });
    case AnswerType::coordinate_3d:
      return last_match(text, any_coord(), [](const std::smatch& s) { return coord_from(s); });
    case AnswerType::mcq:
      return last_match(text, any_letter(), [](const std::smatch& s) -> std::optional<ParsedValue> {
        return s[1].str();
      });
  }
  return std::nullopt;
}

Prediction parse_prediction(std::string item_id, std::string raw_text, AnswerType type) {
  Prediction p;
  p.item_id = std::move(item_id);
  p.raw_text = std::move(raw_text);
  if ((p.parsed = parse_answer(p.raw_text, type, ParseMode::strict))) {
    p.mode = ParseMode::strict;
  } else if ((p.parsed = parse_answer(p.raw_text, type, ParseMode::lenient))) {
    p.mode = ParseMode::lenient;
  }
  return p;
}

double t_mra(double y, double y_hat, double T) {
  if (!(y > 0.0)) throw Error(ErrorCode::invalid_argument, "t_mra needs a positive ground truth");
  const double rel = (std::abs(y_hat - y) - T) / y;
  int hits = 0;
  for (int k = 0; k < 10; ++k) {
    const double theta = (50 + 5 * k) / 100.0;
    if (rel < 1.0 - theta) ++hits;
  }
  return hits / 10.0;
}

ItemScore score_item(const QAItem& item, const Prediction& prediction) {
  ItemScore s;
  s.item_id = item.id;
  s.parsed = prediction.parsed.has_value();
  if (!s.parsed) return s;
  const auto& v = *prediction.parsed;
  switch (item.answer_type) {
    case AnswerType::float_meters: {
      const auto* p = std::get_if<double>(&v);
      const auto* g = std::get_if<double>(&item.ground_truth);
      if (!p || !g) break;
      s.score = t_mra(*g, *p);
      return s;
    }
    case AnswerType::coordinate_3d: {
      const auto* p = std::get_if<Vec3>(&v);
      const auto* g = std::get_if<Vec3>(&item.ground_truth);
      if (!p || !g) break;
      s.score = (*p - *g).norm() < kLocalizationRadiusM ? 1.0 : 0.0;
      return s;
    }
    case AnswerType::integer: {
      const auto* p = std::get_if<long long>(&v);
      const auto* g = std::get_if<long long>(&item.ground_truth);
      if (!p || !g) break;
      s.score = *p == *g ? 1.0 : 0.0;
      return s;
    }
    case AnswerType::mcq: {
      const auto* p = std::get_if<std::string>(&v);
      const auto* g = std::get_if<std::string>(&item.ground_truth);
      if (!p || !g) break;
      s.score = *p == *g ? 1.0 : 0.0;
      return s;
    }
  }
  s.type_mismatch = true;
  s.score = 0.0;
  return s;
}

double Cell::accuracy() const {
  return count ? 100.0 * sum / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
}

EvalReport aggregate(std::span<const QAItem> items, std::span<const Prediction> predictions) {
  std::unordered_map<std::string, const Prediction*> by_id;
  for (const auto& p : predictions)
    if (!by_id.emplace(p.item_id, &p).second)
      throw Error(ErrorCode::duplicate_prediction, "duplicate prediction for item " + p.item_id);

  EvalReport r;
  r.items.reserve(items.size());
  for (const auto& item : items) {
    ItemScore s;
    auto it = by_id.find(item.id);
    if (it == by_id.end()) {
      s.item_id = item.id;
      s.missing = true;
      ++r.missing;
    } else {
      const Prediction parsed = it->second->parsed
                                    ? *it->second
                                    : parse_prediction(item.id, it->second->raw_text, item.answer_type);
      s = score_item(item, parsed);
    }
    if (!s.parsed) ++r.unparsed;
    if (s.type_mismatch) ++r.type_mismatches;
    auto add = [&](Cell& c) {
      c.sum += s.score;
      ++c.count;
    };
    add(r.per_subcategory[item.subcategory]);
    add(r.per_sport[item.sport]);
    add(r.per_sport_subcategory[item.sport][item.subcategory]);
    add(r.overall);
    r.items.push_back(std::move(s));
  }
  double macro = 0.0;
  int cells = 0;
  for (const auto& [sub, c] : r.per_subcategory)
    if (c.count) {
      macro += c.accuracy();
      ++cells;
    }
  r.macro = cells ? macro / cells : std::numeric_limits<double>::quiet_NaN();
  return r;
}

std::string format_table(const EvalReport& report) {
  std::ostringstream os;
  os << "Overall = micro average over items (macro over subcategories: ";
  if (std::isnan(report.macro))
    os << "-";
  else
    os << std::fixed << std::setprecision(1) << report.macro;
  os << ")\n";
  constexpr int kRow = 14;
  constexpr int kCol = 14;
  os << std::left << std::setw(kRow) << "" << std::right;
  for (auto s : kAllSubcategories) os << std::setw(kCol) << column_label(s);
  os << std::setw(kCol) << "Overall" << "\n";

  auto cell = [&](const Cell* c) {
    if (!c || !c->count) {
      os << std::setw(kCol) << "-";
    } else {
      os << std::setw(kCol) << std::fixed << std::setprecision(1) << c->accuracy();
    }
  };
  auto row = [&](const std::string& name, const std::map<Subcategory, Cell>& cells, const Cell& total) {
    os << std::left << std::setw(kRow) << name << std::right;
    for (auto s : kAllSubcategories) {
      auto it = cells.find(s);
      cell(it == cells.end() ? nullptr : &it->second);
    }
    cell(&total);
    os << "\n";
  };
  for (const auto& [sport, cells] : report.per_sport_subcategory)
    row(std::string(to_string(sport)), cells, report.per_sport.at(sport));
  row("All", report.per_subcategory, report.overall);
  os << "items " << report.overall.count << ", unparsed " << report.unparsed << ", missing "
     << report.missing << "\n";
  return os.str();
}

std::vector<CurvePoint> ambiguity_curve(std::span<const QAItem> items, const EvalReport& report,
                                        std::span<const double> percent_grid) {
  if (report.items.size() != items.size())
    throw Error(ErrorCode::invalid_argument, "report does not match the item list");
  struct Row {
    double ratio;
    const std::string* id;
    double score;
  };
  std::vector<Row> rows;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& it = items[i];
    if (it.subcategory != Subcategory::object_object && it.subcategory != Subcategory::object_line)
      continue;
    if (!it.meta.ratio_3d_2d) continue;
    rows.push_back({*it.meta.ratio_3d_2d, &it.id, report.items[i].score});
  }
  if (rows.empty()) throw Error(ErrorCode::empty_input, "no items with a ratio");
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.ratio != b.ratio) return a.ratio > b.ratio;
    return *a.id < *b.id;
  });
  std::vector<CurvePoint> out;
  for (double k : percent_grid) {
    if (!(k > 0.0 && k <= 100.0))
      throw Error(ErrorCode::invalid_argument, "grid percentages must lie in (0, 100]");
    auto n = static_cast<std::size_t>(std::ceil(k / 100.0 * static_cast<double>(rows.size()) - 1e-9));
    n = std::clamp<std::size_t>(n, 1, rows.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += rows[i].score;
    out.push_back({k, n, 100.0 * sum / static_cast<double>(n)});
  }
  return out;
}

}  // namespace courtlab
