#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "capcurate/jsonl.hpp"

namespace capcurate {

inline constexpr double kDefaultAnlsThreshold = 0.5;

// Levenshtein distance over Unicode code points.
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);
std::u32string to_code_points(std::string_view utf8);

// Case-sensitive normalized Levenshtein similarity: 1 - NL when NL < tau,
// else 0. Two empty strings score 1.
double anls(std::string_view prediction, std::string_view reference, double tau = kDefaultAnlsThreshold);

struct OcrScore {
  std::vector<double> per_sample;
  double mean = 0.0;
  double tau = kDefaultAnlsThreshold;

  Json to_json() const;
};

OcrScore ocr_benchmark_score(std::span<const std::string> predictions, std::span<const std::string> references,
                             double tau = kDefaultAnlsThreshold);

// ---------------------------------------------------------------------------
// Good-Same-Bad pairwise judgments

// Canonical verdict: G = candidate A better, S = same, B = candidate B better.
enum class Verdict { G, S, B };
enum class PresentedOrder { AB, BA };
// What a rater clicks, relative to the screen.
enum class RaterVerdict { left_better, same, right_better };

std::string_view to_string(Verdict v) noexcept;
std::string_view to_string(PresentedOrder o) noexcept;
std::string_view to_string(RaterVerdict v) noexcept;
Verdict parse_verdict(std::string_view text);
PresentedOrder parse_presented_order(std::string_view text);
RaterVerdict parse_rater_verdict(std::string_view text);

Verdict swap(Verdict v) noexcept;
PresentedOrder swap(PresentedOrder o) noexcept;
// Maps a screen-relative verdict into canonical A/B space and back.
Verdict unblind(RaterVerdict v, PresentedOrder order) noexcept;
RaterVerdict blind(Verdict v, PresentedOrder order) noexcept;

struct GsbJudgment {
  std::string pair_id;
  std::string rater_id;
  int score_a = 0;  // 1..5
  int score_b = 0;
  Verdict verdict = Verdict::S;
  PresentedOrder presented_order = PresentedOrder::AB;

  void validate() const;
  Json to_json() const;
  static GsbJudgment from_json(const Json& obj, std::size_t line = 0);
};

struct GsbReport {
  std::uint64_t total = 0;
  std::uint64_t wins = 0;
  std::uint64_t ties = 0;
  std::uint64_t losses = 0;
  double win_rate = 0.0;
  double tie_rate = 0.0;
  double loss_rate = 0.0;
  double win_plus_tie = 0.0;

  Json to_json() const;
};

GsbReport gsb_aggregate(std::span<const GsbJudgment> judgments);

inline constexpr double kGoldThreshold = 0.95;

struct GoldResult {
  std::uint64_t checked = 0;
  std::uint64_t matched = 0;
  double accuracy = 0.0;
  bool pass = false;

  Json to_json() const;
};

// Accuracy over judgments of gold pairs. Every gold pair must have been
// judged.
GoldResult gold_accuracy(std::span<const GsbJudgment> judgments, const std::map<std::string, Verdict>& gold,
                         double threshold = kGoldThreshold);

// ---------------------------------------------------------------------------
// Quality dimensions (1-5 human ratings per stage)

struct QualityDimensions {
  double difficulty = 0.0;
  double complexity = 0.0;
  double relevance = 0.0;

  void validate() const;
  Json to_json() const;
  static QualityDimensions from_json(const Json& obj);
};

struct StageRatings {
  std::string stage;
  std::vector<double> difficulty;
  std::vector<double> complexity;
  std::vector<double> relevance;
};

struct QualityDimensionReport {
  std::vector<std::string> stages;
  std::vector<QualityDimensions> means;
  bool difficulty_monotone = true;
  bool complexity_monotone = true;
  bool relevance_monotone = true;

  bool all_monotone() const noexcept { return difficulty_monotone && complexity_monotone && relevance_monotone; }
  Json to_json() const;
};

// Per-stage means and, per dimension, whether they never decrease from one
// stage to the next.
QualityDimensionReport quality_dimension_report(std::span<const StageRatings> stages);

}  // namespace capcurate
