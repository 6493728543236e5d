#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "capcurate/corpus.hpp"
#include "capcurate/error.hpp"
#include "capcurate/jsonl.hpp"
#include "capcurate/quality.hpp"

namespace capcurate {

// Labels with a fixed meaning; any other non-empty name is allowed.
const std::vector<std::string>& known_group_names();

struct DataGroup {
  std::string name;
  std::vector<std::string> datasets;
  double weight = 1.0;  // relative sample share
  int repeat_factor = 1;

  Json to_json() const;
  static DataGroup from_json(const Json& obj);
};

struct GroupAllocation {
  std::string name;
  std::uint64_t samples = 0;  // training samples, repeats included
  std::uint64_t unique_samples = 0;  // ceil(samples / repeat_factor)
};

struct MixtureSpec {
  std::vector<DataGroup> groups;
  std::uint64_t total_budget = 0;

  void validate() const;
  double weight_sum() const;
  const DataGroup* find(const std::string& name) const;
  bool contains_dataset(const std::string& dataset_id) const;

  // Largest-remainder split of `budget` (default total_budget) by weight;
  // the sum is exactly `budget`. Ties in the remainder go to the earlier
  // group.
  std::vector<GroupAllocation> allocate(std::optional<std::uint64_t> budget = std::nullopt) const;

  // Halves one group's weight. The per-unit sample count is kept, so the
  // absolute budget shrinks by the samples that group gives up.
  MixtureSpec halved(std::size_t group_index) const;

  // sha256 of the canonical JSON form.
  std::string hash() const;

  Json to_json() const;
  static MixtureSpec from_json(const Json& obj);
  static MixtureSpec load(const std::filesystem::path& path);
};

class EvalOracle {
 public:
  virtual ~EvalOracle() = default;
  // Score of a proxy trained on `budget` samples drawn from `mixture`.
  virtual double evaluate(const MixtureSpec& mixture, std::uint64_t budget) = 0;
};

// Wraps any callable.
class FunctionOracle final : public EvalOracle {
 public:
  using Fn = std::function<double(const MixtureSpec&, std::uint64_t)>;
  explicit FunctionOracle(Fn fn) : fn_(std::move(fn)) {}
  double evaluate(const MixtureSpec& mixture, std::uint64_t budget) override { return fn_(mixture, budget); }

 private:
  Fn fn_;
};

// Shell-command oracle: the command reads {"mixture": ..., "budget": k} on
// stdin and prints one number on stdout. Non-zero exit or a non-numeric
// reply throws Error(transport).
class CommandOracle final : public EvalOracle {
 public:
  explicit CommandOracle(std::string command) : command_(std::move(command)) {}
  double evaluate(const MixtureSpec& mixture, std::uint64_t budget) override;

 private:
  std::string command_;
};

struct QuickEvalEntry {
  std::string mixture_hash;
  std::uint64_t k = 0;
  double score = 0.0;

  Json to_json() const;
  static QuickEvalEntry from_json(const Json& obj, std::size_t line = 0);
};

// Remembers every quick evaluation, optionally appending to a JSONL file.
class QuickEvalLedger {
 public:
  QuickEvalLedger() = default;
  explicit QuickEvalLedger(std::filesystem::path path);

  void record(const QuickEvalEntry& entry);
  std::vector<QuickEvalEntry> entries() const;
  std::optional<double> lookup(const std::string& mixture_hash, std::uint64_t k) const;

 private:
  std::optional<std::filesystem::path> path_;
  mutable std::mutex mu_;
  std::vector<QuickEvalEntry> entries_;
};

double quick_quality_eval(const MixtureSpec& collection, std::uint64_t k, EvalOracle& oracle,
                          QuickEvalLedger* ledger = nullptr);

// Sample-shard subset with near-equal counts per stratum.
struct StratifiedSubsetOptions {
  std::uint64_t k = 0;
  std::function<std::string(const CaptionSample&)> strata_key;
  std::uint64_t seed = 0;
};

std::function<std::string(const CaptionSample&)> strata_key_by_name(const std::string& name);

// Per-stratum quotas. Strata are visited in key order; each gets an equal
// share, strata smaller than their share are taken whole and the rest is
// shared again among the others. Leftover single slots go to the first
// strata in key order.
std::map<std::string, std::uint64_t> stratum_quotas(const std::map<std::string, std::uint64_t>& sizes,
                                                     std::uint64_t k);

// Selects inside each stratum by the smallest subset_key(sample_id, seed),
// writes the chosen samples under `out_dir` (one shard per source shard
// that contributed, source order kept) and returns the saved manifest.
DatasetManifest stratified_subset(const DatasetManifest& manifest, const std::filesystem::path& root,
                                  const StratifiedSubsetOptions& options, const std::filesystem::path& out_dir);

struct CompositionTrial {
  int pass = 0;
  std::string group;
  double weight_before = 0.0;
  double weight_after = 0.0;
  double score = 0.0;       // score of the trial mixture
  double best_score = 0.0;  // best score after deciding on this trial
  bool retained = false;

  Json to_json() const;
};

struct CompositionResult {
  MixtureSpec mixture;
  double baseline_score = 0.0;
  double final_score = 0.0;
  std::vector<CompositionTrial> trail;
  int passes = 0;
  std::uint64_t trial_calls = 0;  // the baseline evaluation is not a trial

  Json to_json() const;
};

class SearchAborted : public Error {
 public:
  SearchAborted(const std::string& message, CompositionResult partial)
      : Error(ErrorCode::transport, message), partial_(std::move(partial)) {}
  const CompositionResult& partial() const noexcept { return partial_; }

 private:
  CompositionResult partial_;
};

inline constexpr int kDefaultMaxPasses = 4;

// Greedy group halving in declared order. A halving is kept only when the
// score strictly improves. Stops after a pass with no kept change or after
// max_passes.
CompositionResult composition_search(const MixtureSpec& initial, EvalOracle& oracle, std::uint64_t k,
                                     int max_passes = kDefaultMaxPasses, QuickEvalLedger* ledger = nullptr);

enum class IncrementalDecision { accept_improves, accept_maintains, reject };
std::string_view to_string(IncrementalDecision d) noexcept;

struct NewDataset {
  std::string dataset_id;
  std::string group;
  double weight = 1.0;
  int repeat_factor = 1;
};

struct IncrementalResult {
  IncrementalDecision decision = IncrementalDecision::accept_maintains;
  double score_without = 0.0;
  double score_with = 0.0;
  double epsilon = 0.0;
  MixtureSpec mixture_with;

  Json to_json() const;
};

inline constexpr double kDefaultIncrementalEpsilon = 0.1;

IncrementalDecision decide_increment(double score_without, double score_with, double epsilon);
// The base mixture with the dataset added to its group (created if absent),
// budget grown at the same per-unit sample count.
MixtureSpec with_dataset(const MixtureSpec& base, const NewDataset& dataset);
IncrementalResult incremental_eval(const MixtureSpec& base, const NewDataset& dataset, EvalOracle& oracle,
                                   std::uint64_t k, double epsilon = kDefaultIncrementalEpsilon,
                                   QuickEvalLedger* ledger = nullptr);

struct CurriculumStage {
  std::string name;
  MixtureSpec mixture;
  QualityDimensions quality;
  std::uint64_t budget = 0;

  Json to_json() const;
  static CurriculumStage from_json(const Json& obj);
};

struct CurriculumPlan {
  std::vector<CurriculumStage> stages;
  Json to_json() const;
};

// Complexity must not decrease from one stage to the next.
CurriculumPlan curriculum_plan(std::vector<CurriculumStage> stages);

// Spearman correlation on midranks. Zero when either side has no rank
// variance.
double spearman(std::span<const double> x, std::span<const double> y);

struct RankPair {
  std::uint64_t size_a = 0;
  std::uint64_t size_b = 0;
  double rho = 0.0;
};

struct RankConsistencyReport {
  std::vector<std::string> datasets;
  std::vector<std::uint64_t> sizes;
  std::vector<RankPair> pairs;
  double min_rho = 0.0;

  Json to_json() const;
};

using ScoreGrid = std::map<std::string, std::map<std::uint64_t, double>>;
ScoreGrid score_grid_from_json(const Json& obj);
RankConsistencyReport rank_consistency(const ScoreGrid& scores);

}  // namespace capcurate
