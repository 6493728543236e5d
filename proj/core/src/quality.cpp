#include "capcurate/quality.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "capcurate/error.hpp"

namespace capcurate {

std::u32string to_code_points(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    int len = b0 < 0x80 ? 1 : (b0 & 0xE0) == 0xC0 ? 2 : (b0 & 0xF0) == 0xE0 ? 3 : (b0 & 0xF8) == 0xF0 ? 4 : 0;
    if (len == 0 || i + static_cast<std::size_t>(len) > s.size()) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    char32_t cp = len == 1 ? b0 : len == 2 ? (b0 & 0x1F) : len == 3 ? (b0 & 0x0F) : (b0 & 0x07);
    bool ok = true;
    for (int k = 1; k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    if (!ok) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += static_cast<std::size_t>(len);
  }
  return out;
}

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

double anls(std::string_view prediction, std::string_view reference, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "ANLS threshold must lie in (0, 1)");
  }
  const auto p = to_code_points(prediction);
  const auto r = to_code_points(reference);
  const std::size_t longest = std::max(p.size(), r.size());
  if (longest == 0) return 1.0;
  const double nl = static_cast<double>(levenshtein(p, r)) / static_cast<double>(longest);
  return nl < tau ? 1.0 - nl : 0.0;
}

Json OcrScore::to_json() const { return Json{{"per_sample", per_sample}, {"mean", mean}, {"tau", tau}}; }

OcrScore ocr_benchmark_score(std::span<const std::string> predictions, std::span<const std::string> references,
                             double tau) {
  if (predictions.size() != references.size()) {
    throw Error(ErrorCode::invalid_argument, "prediction/reference length mismatch: " +
                                                 std::to_string(predictions.size()) + " vs " +
                                                 std::to_string(references.size()));
  }
  if (predictions.empty()) throw Error(ErrorCode::invalid_argument, "no predictions to score");
  OcrScore s;
  s.tau = tau;
  s.per_sample.reserve(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) s.per_sample.push_back(anls(predictions[i], references[i], tau));
  s.mean = std::accumulate(s.per_sample.begin(), s.per_sample.end(), 0.0) / static_cast<double>(s.per_sample.size());
  return s;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::G: return "G";
    case Verdict::S: return "S";
    case Verdict::B: return "B";
  }
  return "S";
}

std::string_view to_string(PresentedOrder o) noexcept { return o == PresentedOrder::AB ? "AB" : "BA"; }

std::string_view to_string(RaterVerdict v) noexcept {
  switch (v) {
    case RaterVerdict::left_better: return "left_better";
    case RaterVerdict::same: return "same";
    case RaterVerdict::right_better: return "right_better";
  }
  return "same";
}

Verdict parse_verdict(std::string_view text) {
  if (text == "G") return Verdict::G;
  if (text == "S") return Verdict::S;
  if (text == "B") return Verdict::B;
  throw Error(ErrorCode::invalid_argument, "verdict must be G, S or B, got '" + std::string(text) + "'");
}

PresentedOrder parse_presented_order(std::string_view text) {
  if (text == "AB") return PresentedOrder::AB;
  if (text == "BA") return PresentedOrder::BA;
  throw Error(ErrorCode::invalid_argument, "presented_order must be AB or BA, got '" + std::string(text) + "'");
}

RaterVerdict parse_rater_verdict(std::string_view text) {
  if (text == "left_better") return RaterVerdict::left_better;
  if (text == "same") return RaterVerdict::same;
  if (text == "right_better") return RaterVerdict::right_better;
  throw Error(ErrorCode::invalid_argument,
              "verdict must be left_better, same or right_better, got '" + std::string(text) + "'");
}

Verdict swap(Verdict v) noexcept {
  return v == Verdict::G ? Verdict::B : v == Verdict::B ? Verdict::G : Verdict::S;
}

PresentedOrder swap(PresentedOrder o) noexcept {
  return o == PresentedOrder::AB ? PresentedOrder::BA : PresentedOrder::AB;
}

Verdict unblind(RaterVerdict v, PresentedOrder order) noexcept {
  const Verdict as_ab = v == RaterVerdict::left_better ? Verdict::G
                        : v == RaterVerdict::right_better ? Verdict::B
                                                          : Verdict::S;
  return order == PresentedOrder::AB ? as_ab : swap(as_ab);
}

RaterVerdict blind(Verdict v, PresentedOrder order) noexcept {
  const Verdict screen = order == PresentedOrder::AB ? v : swap(v);
  return screen == Verdict::G ? RaterVerdict::left_better
         : screen == Verdict::B ? RaterVerdict::right_better
                                : RaterVerdict::same;
}

void GsbJudgment::validate() const {
  if (pair_id.empty()) throw Error(ErrorCode::invalid_argument, "judgment pair_id must be non-empty");
  for (int s : {score_a, score_b}) {
    if (s < 1 || s > 5) {
      throw Error(ErrorCode::invalid_argument, "quality scores must be integers in 1..5, got " + std::to_string(s));
    }
  }
}

Json GsbJudgment::to_json() const {
  return Json{{"pair_id", pair_id},      {"rater_id", rater_id},         {"score_a", score_a},
              {"score_b", score_b},      {"verdict", to_string(verdict)}, {"presented_order", to_string(presented_order)}};
}

GsbJudgment GsbJudgment::from_json(const Json& obj, std::size_t line) {
  GsbJudgment j;
  j.pair_id = field::required_string(obj, "pair_id", line);
  j.rater_id = field::optional_string(obj, "rater_id", line).value_or("");
  j.score_a = static_cast<int>(field::required_int(obj, "score_a", line));
  j.score_b = static_cast<int>(field::required_int(obj, "score_b", line));
  try {
    j.verdict = parse_verdict(field::required_string(obj, "verdict", line));
    j.presented_order = parse_presented_order(field::optional_string(obj, "presented_order", line).value_or("AB"));
    j.validate();
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(line, "judgment", e.what());
  }
  return j;
}

Json GsbReport::to_json() const {
  return Json{{"total", total},       {"wins", wins},           {"ties", ties},
              {"losses", losses},     {"win_rate", win_rate},   {"tie_rate", tie_rate},
              {"loss_rate", loss_rate}, {"win_plus_tie", win_plus_tie}};
}

GsbReport gsb_aggregate(std::span<const GsbJudgment> judgments) {
  if (judgments.empty()) throw Error(ErrorCode::invalid_argument, "no judgments to aggregate");
  GsbReport r;
  for (const auto& j : judgments) {
    switch (j.verdict) {
      case Verdict::G: ++r.wins; break;
      case Verdict::S: ++r.ties; break;
      case Verdict::B: ++r.losses; break;
    }
  }
  r.total = judgments.size();
  const auto n = static_cast<double>(r.total);
  r.win_rate = static_cast<double>(r.wins) / n;
  r.tie_rate = static_cast<double>(r.ties) / n;
  r.loss_rate = static_cast<double>(r.losses) / n;
  r.win_plus_tie = static_cast<double>(r.wins + r.ties) / n;
  return r;
}

Json GoldResult::to_json() const {
  return Json{{"checked", checked}, {"matched", matched}, {"accuracy", accuracy}, {"pass", pass}};
}

GoldResult gold_accuracy(std::span<const GsbJudgment> judgments, const std::map<std::string, Verdict>& gold,
                         double threshold) {
  if (gold.empty()) throw Error(ErrorCode::invalid_argument, "gold set is empty");
  std::set<std::string> judged;
  for (const auto& j : judgments) judged.insert(j.pair_id);
  std::string missing;
  for (const auto& [pair_id, _] : gold) {
    if (judged.count(pair_id) == 0) missing += (missing.empty() ? "" : ", ") + pair_id;
  }
  if (!missing.empty()) {
    throw Error(ErrorCode::invalid_argument, "gold pairs without judgments: " + missing);
  }
  GoldResult r;
  for (const auto& j : judgments) {
    auto it = gold.find(j.pair_id);
    if (it == gold.end()) continue;
    ++r.checked;
    if (it->second == j.verdict) ++r.matched;
  }
  r.accuracy = static_cast<double>(r.matched) / static_cast<double>(r.checked);
  r.pass = r.accuracy >= threshold;
  return r;
}

// ---------------------------------------------------------------------------

void QualityDimensions::validate() const {
  for (double v : {difficulty, complexity, relevance}) {
    if (!(v >= 1.0 && v <= 5.0)) {
      throw Error(ErrorCode::invalid_argument, "quality dimension means must lie in [1, 5]");
    }
  }
}

Json QualityDimensions::to_json() const {
  return Json{{"difficulty", difficulty}, {"complexity", complexity}, {"relevance", relevance}};
}

QualityDimensions QualityDimensions::from_json(const Json& obj) {
  QualityDimensions q{obj.at("difficulty").get<double>(), obj.at("complexity").get<double>(),
                      obj.at("relevance").get<double>()};
  q.validate();
  return q;
}

Json QualityDimensionReport::to_json() const {
  Json rows = Json::array();
  for (std::size_t i = 0; i < stages.size(); ++i) {
    Json r = means[i].to_json();
    r["stage"] = stages[i];
    rows.push_back(std::move(r));
  }
  return Json{{"stages", rows},
              {"monotone",
               Json{{"difficulty", difficulty_monotone},
                    {"complexity", complexity_monotone},
                    {"relevance", relevance_monotone}}}};
}

QualityDimensionReport quality_dimension_report(std::span<const StageRatings> stages) {
  if (stages.empty()) throw Error(ErrorCode::invalid_argument, "no stages to report");
  QualityDimensionReport report;
  auto mean_of = [](const std::vector<double>& xs, const std::string& stage, const char* dim) {
    if (xs.empty()) {
      throw Error(ErrorCode::invalid_argument, "stage '" + stage + "' has no " + dim + " ratings");
    }
    for (double x : xs) {
      if (!(x >= 1.0 && x <= 5.0)) {
        throw Error(ErrorCode::invalid_argument, "stage '" + stage + "': " + dim + " rating outside 1..5");
      }
    }
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  };
  for (const auto& s : stages) {
    report.stages.push_back(s.stage);
    report.means.push_back(QualityDimensions{mean_of(s.difficulty, s.stage, "difficulty"),
                                             mean_of(s.complexity, s.stage, "complexity"),
                                             mean_of(s.relevance, s.stage, "relevance")});
  }
  for (std::size_t i = 1; i < report.means.size(); ++i) {
    const auto& prev = report.means[i - 1];
    const auto& cur = report.means[i];
    report.difficulty_monotone &= cur.difficulty >= prev.difficulty;
    report.complexity_monotone &= cur.complexity >= prev.complexity;
    report.relevance_monotone &= cur.relevance >= prev.relevance;
  }
  return report;
}

}  // namespace capcurate
